use thiserror::Error;

use crate::game::{Player, ValidationReport};
use crate::polytope::CorrelationPlan;
use crate::solver::SolveStats;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("game failed validation:\n{0}")]
    Validation(ValidationReport),

    #[error("sequence {seq} is not a non-empty sequence of {player}")]
    UnknownSequence { player: Player, seq: usize },

    #[error("plan is infeasible: residual {residual:e} exceeds tolerance {tolerance:e}")]
    InfeasiblePlan { residual: f64, tolerance: f64 },

    #[error("constraint system is singular: pivot {pivot:e} at elimination step {step}")]
    SingularSystem { step: usize, pivot: f64 },

    #[error("{what}: {count} exceeds the cap of {cap}")]
    TooLarge { what: &'static str, count: u128, cap: u128 },

    #[error("no legal placement exists for ship {ship} ({reason})")]
    Unsatisfiable { ship: usize, reason: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("solver stopped after {} iterations with violation {:e}", stats.iterations, stats.final_violation)]
    DidNotConverge { plan: Box<CorrelationPlan>, stats: Box<SolveStats> },

    #[error("plan does not match the game: {0}")]
    IndexMismatch(String),

    #[error("LP parse error on line {line}: {msg}")]
    LpParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
