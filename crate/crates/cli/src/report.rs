use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use efce_core::brute_force::{check_efce, DEFAULT_PLAN_CAP};
use efce_core::game::{GameTree, Player, SeqId};
use efce_core::incentive::all_deviations;
use efce_core::lp::{build_lp, write_model, Formulation, LpFormat};
use efce_core::solver::Workspace;
use efce_core::Mode;

use crate::files::{load_game, load_plan, output, stamp};
use crate::CheckFailed;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormulationArg {
    /// Minimize the largest deviation bound `u`.
    MinDev,
    /// Deviation bounds as hard constraints, constant objective.
    FeasDev,
    /// Deviation constraints, maximize social welfare.
    MaxSw,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::MinDev => Formulation::MinDeviation,
            FormulationArg::FeasDev => Formulation::FeasDeviation,
            FormulationArg::MaxSw => Formulation::MaximumSw,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Lp,
    Mps,
}

#[derive(Args)]
pub struct ExportArgs {
    game: PathBuf,
    #[arg(long, value_enum, default_value_t = FormulationArg::MaxSw)]
    formulation: FormulationArg,
    /// File format (default: from the output extension, else LP).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output file (default: stdout).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

pub fn export_lp(args: ExportArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let poly = efce_core::Polytope::new(&game);
    let model = build_lp(&poly, args.formulation.into());
    let format = match args.format {
        Some(FormatArg::Lp) => LpFormat::Lp,
        Some(FormatArg::Mps) => LpFormat::Mps,
        None if args.out.as_ref().and_then(|p| p.extension()).is_some_and(|e| e.eq_ignore_ascii_case("mps")) => {
            LpFormat::Mps
        }
        None => LpFormat::Lp,
    };
    let mut w = output(args.out.as_deref())?;
    write_model(&model, format, &mut w)?;
    w.flush()?;
    if let Some(p) = &args.out {
        eprintln!("wrote {} ({} variables, {} constraints)", p.display(), model.vars.len(), model.constraints.len());
    }
    Ok(())
}

fn trigger_label(game: &GameTree, p: Player, s: SeqId) -> (String, String) {
    match game.seq_label(p, s) {
        Some((i, a)) => (i.to_string(), a.to_string()),
        None => (String::new(), String::new()),
    }
}

#[derive(Args)]
pub struct VerifyArgs {
    game: PathBuf,
    /// Plan CSV as written by `solve --out`.
    plan: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Per-trigger CSV report.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Largest number of reduced plans enumerated per player.
    #[arg(long, default_value_t = DEFAULT_PLAN_CAP)]
    plan_cap: u128,
}

pub fn verify(args: VerifyArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let ws = Workspace::new(&game)?;
    let plan = load_plan(&ws.poly, &args.plan)?;
    let v = ws.violation(&plan.values, Mode::Feasibility);
    let report = check_efce(&ws.poly, &plan, args.eps, args.plan_cap)?;
    let worst = report.best.iter().map(|b| b.2).fold(0.0f64, f64::max);
    println!("feasibility residual {:.3e}, min entry {:.3e}", v.feas_residual, v.min_entry);
    println!(
        "{} triggers, {} deviation plans checked, largest gain {:.3e}, {} above {:e}",
        report.best.len(),
        report.checked,
        worst,
        report.violations.len(),
        args.eps
    );
    let mut shown = report.violations.clone();
    shown.sort_by(|a, b| b.value.total_cmp(&a.value));
    for d in shown.iter().take(10) {
        let (i, a) = trigger_label(&game, d.player, d.trigger);
        println!("  {} trigger infoset {i} action {a}: gain {:.3e}", d.player, d.value);
    }
    if let Some(path) = &args.csv {
        let mut w = output(Some(path))?;
        w.write_all(stamp().as_bytes())?;
        let mut out = csv::Writer::from_writer(&mut w);
        out.write_record(["player", "trigger_infoset", "trigger_action", "max_gain", "violated"])?;
        for &(p, s, value) in &report.best {
            let (i, a) = trigger_label(&game, p, s);
            out.write_record([p.to_string(), i, a, format!("{value:e}"), (value > args.eps).to_string()])?;
        }
        out.flush()?;
        drop(out);
        w.flush()?;
    }
    let ok = report.violations.is_empty() && v.feas_residual <= args.eps && -v.min_entry <= args.eps;
    if ok {
        println!("plan is an equilibrium within {:e}", args.eps);
        Ok(())
    } else {
        Err(CheckFailed(format!("plan is not an equilibrium within {:e}", args.eps)).into())
    }
}

#[derive(Args)]
pub struct AuditArgs {
    game: PathBuf,
    plan: PathBuf,
    /// Number of triggers to list.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Number of most likely outcomes to list.
    #[arg(long, default_value_t = 10)]
    outcomes: usize,
}

pub fn audit(args: AuditArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let ws = Workspace::new(&game)?;
    let plan = load_plan(&ws.poly, &args.plan)?;
    let v = ws.violation(&plan.values, Mode::Feasibility);
    let [u1, u2] = ws.poly.terminals.expected_payoffs(&plan.values);
    println!("feasibility residual {:.3e}", v.feas_residual);
    println!("min entry {:.3e}", v.min_entry);
    println!("max deviation {:.3e}", v.max_deviation);
    println!("social welfare {:.6}, payoffs ({u1:.6}, {u2:.6})", v.social_welfare);

    let mut devs = all_deviations(&ws.poly, &ws.triggers, &plan.values);
    devs.sort_by(|a, b| b.value.total_cmp(&a.value));
    println!("top triggers:");
    for d in devs.iter().take(args.top) {
        let (i, a) = trigger_label(&game, d.player, d.trigger);
        println!("  {} infoset {i} action {a}: {:.6e}", d.player, d.value);
    }

    let dist = ws.poly.terminals.distribution(&plan.values);
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
    println!("outcomes (terminal, probability, payoffs):");
    for &t in order.iter().take(args.outcomes) {
        let [a, b] = game.payoffs(t);
        println!("  {t}: {:.6} ({a}, {b})", dist[t]);
    }
    Ok(())
}

#[derive(Args)]
pub struct StatsArgs {
    game: PathBuf,
}

pub fn stats(args: StatsArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let ws = Workspace::new(&game)?;
    let [s1, s2] = game.sequence_counts();
    let infosets = Player::BOTH.map(|p| game.form(p).n_infosets());
    println!("nodes {}", game.nodes().len());
    println!("terminals {}", game.terminals().len());
    println!("infosets {} / {}", infosets[0], infosets[1]);
    println!("sequences {s1} / {s2} (including the empty sequence)");
    println!("relevant sequence pairs {}", ws.poly.pairs.len());
    println!("consistency systems {} / {}", ws.poly.consistency.x1.len(), ws.poly.consistency.x2.len());
    println!("distinct factorizations {}", ws.projectors.distinct_factors);
    println!("triggers {}", ws.triggers.len());
    Ok(())
}
