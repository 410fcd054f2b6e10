//! Parametric benchmark games.

mod battleship;
mod sheriff;

pub use battleship::{gen_battleship, gen_battleship_with_losses, BattleshipParams, Ship};
pub use sheriff::{gen_sheriff, SheriffParams};

/// Default cap on generated tree size, in nodes.
pub const DEFAULT_NODE_CAP: usize = 50_000_000;
