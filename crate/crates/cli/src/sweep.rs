use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use efce_core::generators::{gen_battleship_with_losses, gen_sheriff, BattleshipParams, SheriffParams};
use efce_core::lp::{build_lp, lexicographic_stage, write_model, Formulation, LpFormat};
use efce_core::{Error, GameTree, Mode, Player, Polytope, Workspace};
use rayon::prelude::*;

use crate::files::{output, stamp};
use crate::solve::SolverFlags;
use crate::{lp_backend, CheckFailed};

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum FamilyArg {
    Battleship,
    Sheriff,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum Backend {
    /// Welfare bisection with the projected subgradient method.
    Subgradient,
    /// Welfare-maximizing LP solved in process.
    Lp,
    /// Write the welfare-maximizing LP of each row to `--lp-dir` without solving.
    LpExport,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum TieBreak {
    None,
    /// Among welfare optima, maximize P1's payoff.
    P1,
    /// Among welfare optima, maximize P2's payoff.
    P2,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Fixed parameter `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Swept parameter `key=start:end:step` or `key=v1,v2,...`. Repeatable; the
    /// rows are the cartesian product, first parameter outermost.
    #[arg(long = "sweep", value_name = "KEY=RANGE")]
    sweep: Vec<String>,
    #[arg(long, value_enum, default_value_t = Backend::Subgradient)]
    backend: Backend,
    /// Directory for `--backend lp-export` files.
    #[arg(long, default_value = "lps")]
    lp_dir: PathBuf,
    /// Secondary objective for `--backend lp`.
    #[arg(long, value_enum, default_value_t = TieBreak::None)]
    tiebreak: TieBreak,
    #[command(flatten)]
    solver: SolverFlags,
    /// Output CSV (default: stdout).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

const BATTLESHIP_KEYS: [(&str, &str); 7] = [
    ("height", "3"),
    ("width", "1"),
    ("ships", "1x1"),
    ("rounds", "2"),
    ("gamma", "2"),
    ("allow_repeat_shots", "false"),
    ("node_cap", "50000000"),
];

const SHERIFF_KEYS: [(&str, &str); 7] =
    [("v", "5"), ("p", "1"), ("s", "1"), ("nmax", "10"), ("bmax", "2"), ("rounds", "2"), ("node_cap", "50000000")];

fn defaults(family: FamilyArg) -> BTreeMap<String, String> {
    let keys: &[(&str, &str)] = match family {
        FamilyArg::Battleship => &BATTLESHIP_KEYS,
        FamilyArg::Sheriff => &SHERIFF_KEYS,
    };
    keys.iter().map(|&(k, v)| (k.to_string(), v.to_string())).collect()
}

fn family_name(f: FamilyArg) -> String {
    f.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn split_kv(s: &str) -> Result<(String, &str)> {
    let (k, v) = s.split_once('=').ok_or_else(|| anyhow!("`{s}` is not KEY=VALUE"))?;
    Ok((k.trim().replace('-', "_"), v.trim()))
}

/// Formats a grid value without float noise such as `0.30000000000000004`.
fn grid_value(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    if r == r.trunc() && r.abs() < 1e15 {
        format!("{}", r as i64)
    } else {
        r.to_string()
    }
}

/// Expands `start:end:step` (inclusive) or a comma list.
pub fn parse_range(range: &str) -> Result<Vec<String>> {
    let parts: Vec<&str> = range.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| anyhow!("bad number `{s}` in range `{range}`"));
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step.is_finite() && step != 0.0) {
                bail!("range `{range}` needs a nonzero step");
            }
            let n = ((b - a) / step + 1e-9).floor();
            if n < 0.0 {
                return Ok(vec![]);
            }
            Ok((0..=n as usize).map(|i| grid_value(a + i as f64 * step)).collect())
        }
        [list] => Ok(list.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()),
        _ => bail!("range `{range}` is neither START:END:STEP nor a comma list"),
    }
}

fn get<T: std::str::FromStr>(p: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let v = &p[key];
    v.parse().map_err(|_| anyhow!("bad value `{v}` for {key}"))
}

enum Instance {
    Battleship(GameTree, Vec<[f64; 2]>),
    Sheriff(GameTree),
}

impl Instance {
    fn game(&self) -> &GameTree {
        match self {
            Instance::Battleship(g, _) | Instance::Sheriff(g) => g,
        }
    }
}

fn build(family: FamilyArg, p: &BTreeMap<String, String>) -> Result<Instance> {
    Ok(match family {
        FamilyArg::Battleship => {
            let ships = crate::gen::parse_ships(&p["ships"])?;
            let mut params =
                BattleshipParams::new(get(p, "height")?, get(p, "width")?, ships, get(p, "rounds")?, get(p, "gamma")?);
            params.allow_repeat_shots = get(p, "allow_repeat_shots")?;
            params.node_cap = get(p, "node_cap")?;
            let (g, losses) = gen_battleship_with_losses(&params)?;
            Instance::Battleship(g, losses)
        }
        FamilyArg::Sheriff => {
            let mut params = SheriffParams::new(
                get(p, "v")?,
                get(p, "p")?,
                get(p, "s")?,
                get(p, "nmax")?,
                get(p, "bmax")?,
                get(p, "rounds")?,
            );
            params.node_cap = get(p, "node_cap")?;
            Instance::Sheriff(gen_sheriff(&params)?)
        }
    })
}

struct RowResult {
    status: String,
    values: Vec<String>,
    detail: String,
}

fn outcome_columns(inst: &Instance, poly: &Polytope, xi: &[f64], violation: f64) -> Vec<String> {
    let [u1, u2] = poly.terminals.expected_payoffs(xi);
    let mut cols = vec![fmt(u1), fmt(u2), fmt(u1 + u2)];
    if let Instance::Battleship(_, losses) = inst {
        let dist = poly.terminals.distribution(xi);
        let (mut s1, mut s2, mut peace) = (0.0, 0.0, 0.0);
        for (d, l) in dist.iter().zip(losses) {
            if l[1] > 0.0 {
                s1 += d;
            }
            if l[0] > 0.0 {
                s2 += d;
            }
            if l[0] == 0.0 && l[1] == 0.0 {
                peace += d;
            }
        }
        cols.extend([fmt(s1), fmt(s2), fmt(peace)]);
    }
    cols.push(format!("{violation:e}"));
    cols
}

fn fmt(x: f64) -> String {
    format!("{x:.9}")
}

fn run_row(args: &SweepArgs, index: usize, params: &BTreeMap<String, String>) -> Result<RowResult> {
    let inst = build(args.family, params)?;
    let game = inst.game();
    match args.backend {
        Backend::Subgradient => {
            let ws = Workspace::new(game)?;
            let cfg = args.solver.config(Mode::Feasibility);
            match ws.maximize_welfare(&cfg, args.solver.bisection_steps) {
                Ok(r) => {
                    let v = r.stats.final_violation;
                    Ok(RowResult {
                        status: "ok".into(),
                        values: outcome_columns(&inst, &ws.poly, &r.plan.values, v),
                        detail: format!("{} solves, threshold {:.6}", r.solves, r.lower),
                    })
                }
                Err(Error::DidNotConverge { plan, stats }) => Ok(RowResult {
                    status: "not_converged".into(),
                    values: outcome_columns(&inst, &ws.poly, &plan.values, stats.final_violation),
                    detail: format!("{} iterations", stats.iterations),
                }),
                Err(e) => Err(e.into()),
            }
        }
        Backend::Lp => {
            let poly = Polytope::new(game);
            let mut model = build_lp(&poly, Formulation::MaximumSw);
            let mut sol = lp_backend::solve(&model)?;
            let player = match args.tiebreak {
                TieBreak::None => None,
                TieBreak::P1 => Some(Player::One),
                TieBreak::P2 => Some(Player::Two),
            };
            if let Some(p) = player {
                lexicographic_stage(&mut model, &poly, sol.objective - 1e-7, p);
                sol = lp_backend::solve(&model)?;
            }
            let xi = &sol.x[..poly.pairs.len()];
            let ws = Workspace::new(game)?;
            let v = ws.violation(xi, Mode::Feasibility);
            let metric = v.feas_residual.max(-v.min_entry).max(v.max_deviation);
            Ok(RowResult {
                status: "ok".into(),
                values: outcome_columns(&inst, &poly, xi, metric),
                detail: String::new(),
            })
        }
        Backend::LpExport => {
            let poly = Polytope::new(game);
            let model = build_lp(&poly, Formulation::MaximumSw);
            let path = args.lp_dir.join(format!("row{index:04}.lp"));
            let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_model(&model, LpFormat::Lp, std::io::BufWriter::new(f))?;
            Ok(RowResult { status: "exported".into(), values: vec![], detail: path.display().to_string() })
        }
    }
}

pub fn run(args: SweepArgs) -> Result<()> {
    let mut base = defaults(args.family);
    let known = |k: &str, base: &BTreeMap<String, String>| -> Result<()> {
        if base.contains_key(k) {
            Ok(())
        } else {
            let names: Vec<&str> = base.keys().map(String::as_str).collect();
            Err(CheckFailed(format!(
                "unknown {} parameter `{k}` (expected one of {})",
                family_name(args.family),
                names.join(", ")
            ))
            .into())
        }
    };
    for s in &args.set {
        let (k, v) = split_kv(s)?;
        known(&k, &base)?;
        base.insert(k, v.to_string());
    }
    let mut axes: Vec<(String, Vec<String>)> = vec![];
    for s in &args.sweep {
        let (k, v) = split_kv(s)?;
        known(&k, &base)?;
        if axes.iter().any(|(name, _)| *name == k) {
            bail!("parameter `{k}` is swept twice");
        }
        axes.push((k, parse_range(v)?));
    }

    let mut grid: Vec<Vec<String>> = vec![vec![]];
    for (_, values) in &axes {
        grid = grid
            .iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut row = prefix.clone();
                    row.push(v.clone());
                    row
                })
            })
            .collect();
    }
    if axes.iter().any(|(_, v)| v.is_empty()) {
        grid.clear();
    }
    if args.backend == Backend::LpExport && !grid.is_empty() {
        fs::create_dir_all(&args.lp_dir).with_context(|| format!("creating {}", args.lp_dir.display()))?;
    }

    let rows: Vec<RowResult> = grid
        .par_iter()
        .enumerate()
        .map(|(i, point)| {
            let mut params = base.clone();
            for ((k, _), v) in axes.iter().zip(point) {
                params.insert(k.clone(), v.clone());
            }
            run_row(&args, i, &params).unwrap_or_else(|e| RowResult {
                status: "error".into(),
                values: vec![],
                detail: format!("{e:#}"),
            })
        })
        .collect();

    let mut header: Vec<String> = axes.iter().map(|(k, _)| k.clone()).collect();
    header.push("status".into());
    let mut value_cols = vec!["p1_utility", "p2_utility", "social_welfare"];
    if args.family == FamilyArg::Battleship {
        value_cols.extend(["p1_sinks", "p2_sinks", "peace"]);
    }
    value_cols.push("violation");
    header.extend(value_cols.iter().map(|s| s.to_string()));
    header.push("detail".into());

    let swept: Vec<&str> = axes.iter().map(|(k, _)| k.as_str()).collect();
    let fixed: Vec<String> =
        base.iter().filter(|(k, _)| !swept.contains(&k.as_str())).map(|(k, v)| format!("{k}={v}")).collect();

    let mut w = output(args.out.as_deref())?;
    w.write_all(stamp().as_bytes())?;
    writeln!(w, "# {} {}", family_name(args.family), fixed.join(" "))?;
    let mut out = csv::Writer::from_writer(&mut w);
    out.write_record(&header)?;
    for (point, r) in grid.iter().zip(&rows) {
        let mut rec = point.clone();
        rec.push(r.status.clone());
        let mut values = r.values.clone();
        values.resize(value_cols.len(), String::new());
        rec.extend(values);
        rec.push(r.detail.clone());
        out.write_record(&rec)?;
    }
    out.flush()?;
    drop(out);
    w.flush()?;
    let failed = rows.iter().filter(|r| r.status == "error").count();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed", rows.len());
    }
    Ok(())
}
