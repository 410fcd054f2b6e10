//! `efce-lab`: generate games, compute correlated equilibria, export LPs and
//! run parameter sweeps.

mod config;
mod files;
mod gen;
mod lp_backend;
mod report;
mod solve;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use efce_core::Error;

#[derive(Parser)]
#[command(
    name = "efce-lab",
    version,
    about = "Extensive-form correlated equilibria: generation, solving, LP export and sweeps"
)]
#[command(args_override_self = true)]
struct Cli {
    /// TOML file of `key = value` defaults for the subcommand's flags. Top-level
    /// keys apply to every subcommand, keys under `[solve]`, `[sweep]`, ... only
    /// to that subcommand. Flags on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for the parallel phases (default: one per core).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark game as JSON.
    Gen(gen::GenArgs),
    /// Run the projected subgradient method on a game.
    Solve(solve::SolveArgs),
    /// Write one of the LP formulations in LP or MPS format.
    ExportLp(report::ExportArgs),
    /// Check a plan against every pure trigger deviation by enumeration.
    Verify(report::VerifyArgs),
    /// Summarize a plan: violations, welfare, worst triggers, outcomes.
    Audit(report::AuditArgs),
    /// Solve a grid of generated games and write one CSV row per instance.
    Sweep(sweep::SweepArgs),
    /// Print sequence, infoset and relevant-pair counts of a game.
    Stats(report::StatsArgs),
}

/// Marks a completed check whose verdict is negative.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

/// 2 validation failure, 3 non-convergence, 4 I/O.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::DidNotConverge { .. } => 3,
                Error::Io(_) => 4,
                Error::Json(j) if j.is_io() => 4,
                Error::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => 4,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 4;
        }
    }
    2
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen(a) => gen::run(a),
        Command::Solve(a) => solve::run(a),
        Command::ExportLp(a) => report::export_lp(a),
        Command::Verify(a) => report::verify(a),
        Command::Audit(a) => report::audit(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Stats(a) => report::stats(a),
    }
}

/// Looks up `--flag` of the subcommand (or `gen` family) named `section`.
fn flag_info(section: &str, flag: &str) -> config::FlagInfo {
    let root = Cli::command();
    let sub = root
        .find_subcommand(section)
        .or_else(|| root.find_subcommand("gen").and_then(|g| g.find_subcommand(section)))?;
    let arg = sub.get_arguments().find(|a| a.get_long() == Some(flag))?;
    Some(arg.get_value_delimiter())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::expand(argv, flag_info) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
