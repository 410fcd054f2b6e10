use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_efce-lab"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn efce-lab")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stderr),
        String::from_utf8_lossy(&out.stdout)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn tiny_sheriff(dir: &Path) -> PathBuf {
    ok(dir, &["gen", "sheriff", "--nmax", "1", "--bmax", "1", "--rounds", "1", "-o", "sh.json"]);
    dir.join("sh.json")
}

/// CSV rows without `#` comment lines.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(false).from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let j = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[j].clone()).collect()
}

#[test]
fn gen_writes_loadable_games() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gen", "battleship", "-o", "bs.json"]);
    let stats = ok(dir.path(), &["stats", "bs.json"]);
    assert!(stats.contains("sequences 49 / 58"), "{stats}");
    let stdout = ok(dir.path(), &["gen", "sheriff", "--nmax", "1", "--bmax", "0", "--rounds", "1"]);
    assert!(stdout.trim_start().starts_with('{'));
}

#[test]
fn solve_verify_audit_round_trip() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    tiny_sheriff(d);
    let summary = ok(d, &["solve", "sh.json", "--out", "plan.csv", "--stats", "trace.csv"]);
    assert!(summary.contains("converged"), "{summary}");
    let plan = fs::read_to_string(d.join("plan.csv")).unwrap();
    assert!(plan.starts_with("# efce-lab "));
    let trace = csv_rows(&fs::read_to_string(d.join("trace.csv")).unwrap());
    assert_eq!(
        trace[0],
        ["iteration", "time_s", "feas_residual", "max_deviation", "social_welfare", "min_entry", "kappa"]
    );

    let v = ok(d, &["verify", "sh.json", "plan.csv", "--eps", "1e-2", "--csv", "verify.csv"]);
    assert!(v.contains("is an equilibrium"), "{v}");
    let rows = csv_rows(&fs::read_to_string(d.join("verify.csv")).unwrap());
    assert!(rows.len() > 1);
    assert!(column(&rows, "violated").iter().all(|x| x == "false"));

    let a = ok(d, &["audit", "sh.json", "plan.csv", "--top", "2", "--outcomes", "2"]);
    for key in ["feasibility residual", "max deviation", "social welfare", "top triggers", "outcomes"] {
        assert!(a.contains(key), "{a}");
    }
}

#[test]
fn welfare_mode_with_threshold() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    tiny_sheriff(d);
    let out = ok(d, &["solve", "sh.json", "--mode", "maxsw", "--tau", "5", "--eps", "1e-1,1e-2"]);
    let sw: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("social welfare "))
        .and_then(|l| l.split(',').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(sw >= 5.0 - 1e-2, "{out}");
}

#[test]
fn zero_plan_fails_verification_and_audit_shows_residual() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    tiny_sheriff(d);
    ok(d, &["solve", "sh.json", "--out", "plan.csv"]);
    let text = fs::read_to_string(d.join("plan.csv")).unwrap();
    let zero: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| if i < 2 { format!("{l}\n") } else { format!("{},0\n", &l[..l.rfind(',').unwrap()]) })
        .collect();
    fs::write(d.join("zero.csv"), zero).unwrap();

    let out = run(d, &["verify", "sh.json", "zero.csv"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stdout));
    let a = ok(d, &["audit", "sh.json", "zero.csv"]);
    let residual: f64 =
        a.lines().find_map(|l| l.strip_prefix("feasibility residual ")).unwrap().trim().parse().unwrap();
    assert!(residual >= 1.0 - 1e-12, "{a}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    tiny_sheriff(d);
    assert_eq!(code(&run(d, &["stats", "missing.json"])), 4);
    assert_eq!(code(&run(d, &["solve", "sh.json", "--max-iters", "2", "--eps", "1e-12", "--no-final-projection"])), 3);
    assert_eq!(code(&run(d, &["sweep", "--family", "sheriff", "--sweep", "gamma=1,2"])), 2);
    assert_eq!(code(&run(d, &["solve", "sh.json", "--bogus"])), 2);
    fs::write(d.join("bad.json"), "{\"not\": \"a game\"}").unwrap();
    assert_eq!(code(&run(d, &["stats", "bad.json"])), 2);
}

#[test]
fn non_converged_solve_still_writes_plan() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    tiny_sheriff(d);
    let out = run(d, &["solve", "sh.json", "--max-iters", "2", "--eps", "1e-12", "--out", "best.csv"]);
    assert_eq!(code(&out), 3);
    assert!(d.join("best.csv").exists());
}

#[test]
fn config_file_supplies_defaults() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("c.toml"), "eta = 0.5\n[sheriff]\nnmax = 2\nbmax = 1\nrounds = 1\n").unwrap();
    ok(d, &["--config", "c.toml", "gen", "sheriff", "-o", "a.json"]);
    ok(d, &["--config", "c.toml", "gen", "sheriff", "--nmax", "1", "-o", "b.json"]);
    ok(d, &["gen", "sheriff", "--nmax", "2", "--bmax", "1", "--rounds", "1", "-o", "c.json"]);
    ok(d, &["gen", "sheriff", "--nmax", "1", "--bmax", "1", "--rounds", "1", "-o", "d.json"]);
    let stats = |f: &str| ok(d, &["--config", "c.toml", "stats", f]);
    assert_eq!(stats("a.json"), stats("c.json"));
    assert_eq!(stats("b.json"), stats("d.json"));
    assert_ne!(stats("a.json"), stats("b.json"));

    fs::write(d.join("s.toml"), "[solve]\nmax_iters = 2\neps = [1e-12]\nno_final_projection = true\n").unwrap();
    assert_eq!(code(&run(d, &["--config", "s.toml", "solve", "d.json"])), 3);
    ok(d, &["--config", "s.toml", "solve", "d.json", "--max-iters", "20000", "--eps", "1e-2"]);
}

#[test]
fn export_lp_formats() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    tiny_sheriff(d);
    let lp = ok(d, &["export-lp", "sh.json", "--formulation", "min-dev"]);
    assert!(lp.contains("Minimize"), "{lp}");
    ok(d, &["export-lp", "sh.json", "-o", "m.mps"]);
    let mps = fs::read_to_string(d.join("m.mps")).unwrap();
    assert!(mps.starts_with("NAME"));
    assert!(mps.contains("ROWS") && mps.contains("COLUMNS") && mps.contains("RHS"));
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let out = ok(dir.path(), &["sweep", "--family", "battleship", "--sweep", "gamma=3:1:1", "--backend", "lp"]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "gamma");
    assert!(out.starts_with("# efce-lab "));
}

#[test]
fn battleship_sweep_peace_probability() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let lp = csv_rows(&ok(d, &["sweep", "--family", "battleship", "--sweep", "gamma=2", "--backend", "lp"]));
    let peace: f64 = column(&lp, "peace")[0].parse().unwrap();
    let sw: f64 = column(&lp, "social_welfare")[0].parse().unwrap();
    assert!((peace - 5.0 / 18.0).abs() <= 1e-6, "{peace}");
    assert!((sw + 13.0 / 18.0).abs() <= 1e-6, "{sw}");

    ok(d, &["sweep", "--family", "battleship", "--sweep", "gamma=2", "-o", "sub.csv"]);
    let sub = csv_rows(&fs::read_to_string(d.join("sub.csv")).unwrap());
    assert_eq!(column(&sub, "status")[0], "ok");
    let peace: f64 = column(&sub, "peace")[0].parse().unwrap();
    assert!((peace - 5.0 / 18.0).abs() <= 1e-2, "{peace}");
}

#[test]
fn sweep_grid_and_row_failures() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = ok(
        d,
        &[
            "sweep",
            "--family",
            "sheriff",
            "--set",
            "nmax=1",
            "--set",
            "rounds=1",
            "--sweep",
            "bmax=0,1",
            "--sweep",
            "v=2:3:1",
            "--backend",
            "lp",
        ],
    );
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 5);
    assert_eq!(column(&rows, "bmax"), ["0", "0", "1", "1"]);
    assert_eq!(column(&rows, "v"), ["2", "3", "2", "3"]);
    assert!(column(&rows, "status").iter().all(|s| s == "ok"));

    let out = ok(d, &["sweep", "--family", "sheriff", "--set", "bmax=0", "--set", "rounds=1", "--sweep", "nmax=1,x"]);
    let rows = csv_rows(&out);
    assert_eq!(column(&rows, "status"), ["ok", "error"]);
    assert!(column(&rows, "detail")[1].contains("nmax"));
}

#[test]
fn lp_export_backend_writes_models() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = ok(
        d,
        &[
            "sweep",
            "--family",
            "sheriff",
            "--set",
            "nmax=1",
            "--set",
            "rounds=1",
            "--sweep",
            "bmax=0,1",
            "--backend",
            "lp-export",
            "--lp-dir",
            "models",
        ],
    );
    let rows = csv_rows(&out);
    assert_eq!(column(&rows, "status"), ["exported", "exported"]);
    for f in column(&rows, "detail") {
        assert!(d.join(f).exists());
    }
}
