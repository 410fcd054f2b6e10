use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::{ArgAction, Args, ValueEnum};
use efce_core::solver::{SolveStats, Workspace};
use efce_core::{Error, Mode, SolveConfig, StepSize};

use crate::files::{load_game, output, stamp, write_plan};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    /// Minimize the largest trigger deviation.
    Feas,
    /// Also require social welfare of at least `--tau`; without `--tau`,
    /// maximize welfare by bisection.
    Maxsw,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StepArg {
    Constant,
    /// `eta / sqrt(t + 1)`.
    Diminishing,
    /// `eta · f / |g|²`.
    Polyak,
}

/// Solver flags shared by `solve` and `sweep`.
#[derive(Args, Clone, Debug)]
pub struct SolverFlags {
    #[arg(long, value_enum, default_value_t = StepArg::Diminishing)]
    pub step: StepArg,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Violation checkpoints, descending; the last one is the stopping target.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "1e-1,1e-2,1e-3")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    /// Skip the extra projection cycles tried once deviations meet the target.
    #[arg(long)]
    pub no_final_projection: bool,
    /// Bisection steps when maximizing welfare.
    #[arg(long, default_value_t = 12)]
    pub bisection_steps: usize,
}

impl SolverFlags {
    pub fn config(&self, mode: Mode) -> SolveConfig {
        let step = match self.step {
            StepArg::Constant => StepSize::Constant(self.eta),
            StepArg::Diminishing => StepSize::Diminishing(self.eta),
            StepArg::Polyak => StepSize::Polyak(self.eta),
        };
        SolveConfig {
            mode,
            step,
            max_iters: self.max_iters,
            eps: self.eps.clone(),
            final_projection: !self.no_final_projection,
            ..SolveConfig::default()
        }
    }
}

#[derive(Args)]
pub struct SolveArgs {
    /// Game JSON file.
    game: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Feas)]
    mode: ModeArg,
    /// Welfare threshold for `--mode maxsw`.
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    #[command(flatten)]
    solver: SolverFlags,
    /// Record every n-th iteration in the stats file.
    #[arg(long, default_value_t = 1)]
    sample_every: usize,
    /// Plan CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-iteration stats CSV output.
    #[arg(long)]
    stats: Option<PathBuf>,
}

fn write_stats(stats: &SolveStats, path: &Path) -> Result<()> {
    let mut w = output(Some(path))?;
    w.write_all(stamp().as_bytes())?;
    let mut out = csv::Writer::from_writer(&mut w);
    out.write_record([
        "iteration",
        "time_s",
        "feas_residual",
        "max_deviation",
        "social_welfare",
        "min_entry",
        "kappa",
    ])?;
    for r in &stats.trace {
        out.write_record([
            r.iteration.to_string(),
            format!("{:.6}", r.time_s),
            format!("{:e}", r.feas_residual),
            format!("{:e}", r.max_deviation),
            r.social_welfare.to_string(),
            format!("{:e}", r.min_entry),
            r.kappa.map(|k| k.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    drop(out);
    w.flush()?;
    Ok(())
}

pub fn run(args: SolveArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let ws = Workspace::new(&game)?;
    let mode = match (args.mode, args.tau) {
        (ModeArg::Maxsw, Some(tau)) => Mode::MaxSocialWelfare { threshold: tau },
        _ => Mode::Feasibility,
    };
    let mut cfg = args.solver.config(mode);
    cfg.sample_every = args.sample_every;

    let outcome = match (args.mode, args.tau) {
        (ModeArg::Maxsw, None) => ws.maximize_welfare(&cfg, args.solver.bisection_steps).map(|r| {
            println!(
                "welfare bisection: {} solves, certified threshold {:.6}, failed above {:.6}",
                r.solves, r.lower, r.upper
            );
            (r.plan, r.stats)
        }),
        _ => ws.solve(&cfg),
    };
    let (plan, stats, err) = match outcome {
        Ok((p, s)) => (p, s, None),
        Err(Error::DidNotConverge { plan, stats }) => {
            let e = Error::DidNotConverge { plan: plan.clone(), stats: stats.clone() };
            (*plan, *stats, Some(e))
        }
        Err(e) => return Err(e.into()),
    };

    let v = ws.violation(&plan.values, mode);
    let [u1, u2] = ws.poly.terminals.expected_payoffs(&plan.values);
    println!(
        "{} after {} iterations: violation {:.3e} (feasibility {:.3e}, min entry {:.3e}, deviation {:.3e})",
        if err.is_none() { "converged" } else { "not converged" },
        stats.iterations,
        stats.final_violation,
        v.feas_residual,
        v.min_entry,
        v.max_deviation
    );
    println!("social welfare {:.6}, payoffs ({u1:.6}, {u2:.6})", v.social_welfare);
    for c in &stats.checkpoints {
        println!("  eps {:e}: iteration {}, {:.3}s", c.eps, c.iteration, c.time_s);
    }
    if let Some(path) = &args.out {
        write_plan(&ws.poly, &plan, path)?;
    }
    if let Some(path) = &args.stats {
        write_stats(&stats, path)?;
    }
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}
