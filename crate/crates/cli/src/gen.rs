use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::{Args, Subcommand};
use efce_core::generators::{gen_battleship, gen_sheriff, BattleshipParams, SheriffParams, Ship, DEFAULT_NODE_CAP};

use crate::files::output;

#[derive(Args)]
pub struct GenArgs {
    #[command(subcommand)]
    family: Family,
}

#[derive(Subcommand)]
enum Family {
    /// Two-player Battleship on an H×W grid.
    Battleship(BattleshipArgs),
    /// Smuggler/Sheriff bribery game.
    Sheriff(SheriffArgs),
}

#[derive(Args)]
struct BattleshipArgs {
    #[arg(long, default_value_t = 3)]
    height: usize,
    #[arg(long, default_value_t = 1)]
    width: usize,
    /// Fleet as `LENGTHxVALUE` items, comma separated.
    #[arg(long, default_value = "1x1")]
    ships: String,
    /// Shots per player.
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    /// Loss multiplier on one's own sunk ships.
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    /// Allow firing at a cell already shot.
    #[arg(long)]
    allow_repeat_shots: bool,
    /// Refuse to build trees with more nodes than this.
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    /// Output file (default: stdout).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SheriffArgs {
    /// Value of each smuggled item.
    #[arg(long, default_value_t = 5.0)]
    v: f64,
    /// Penalty per discovered item.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Compensation for a fruitless inspection.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 10)]
    nmax: usize,
    #[arg(long, default_value_t = 2)]
    bmax: usize,
    /// Bargaining rounds.
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    /// Output file (default: stdout).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

pub fn parse_ships(s: &str) -> Result<Vec<Ship>> {
    s.split(',')
        .map(|item| {
            let (l, v) = item.trim().split_once('x').ok_or_else(|| anyhow!("ship `{item}` is not LENGTHxVALUE"))?;
            Ok(Ship {
                length: l.parse().map_err(|_| anyhow!("bad ship length `{l}`"))?,
                value: v.parse().map_err(|_| anyhow!("bad ship value `{v}`"))?,
            })
        })
        .collect()
}

pub fn run(args: GenArgs) -> Result<()> {
    let (game, out) = match args.family {
        Family::Battleship(a) => {
            let mut params = BattleshipParams::new(a.height, a.width, parse_ships(&a.ships)?, a.rounds, a.gamma);
            params.allow_repeat_shots = a.allow_repeat_shots;
            params.node_cap = a.node_cap;
            (gen_battleship(&params)?, a.out)
        }
        Family::Sheriff(a) => {
            let mut params = SheriffParams::new(a.v, a.p, a.s, a.nmax, a.bmax, a.rounds);
            params.node_cap = a.node_cap;
            (gen_sheriff(&params)?, a.out)
        }
    };
    let mut w = output(out.as_deref())?;
    game.to_doc().write_json(&mut w)?;
    writeln!(w)?;
    w.flush()?;
    if let Some(p) = out {
        let [n1, n2] = game.sequence_counts();
        eprintln!(
            "wrote {} ({} nodes, {} terminals, sequences {n1}/{n2})",
            p.display(),
            game.nodes().len(),
            game.terminals().len()
        );
    }
    Ok(())
}
