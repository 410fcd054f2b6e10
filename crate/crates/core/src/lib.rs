//! Extensive-form correlated equilibria for two-player games without chance.
//!
//! Correlation plans live on relevant sequence pairs. Equilibria are found by
//! a projected subgradient method on the largest trigger-agent deviation
//! value, or exported as linear programs for an external solver.

pub mod brute_force;
pub mod error;
pub mod game;
pub mod generators;
pub mod incentive;
pub mod lp;
pub mod polytope;
pub mod projection;
pub mod solver;

pub use error::{Error, Result};
pub use game::{GameDoc, GameTree, Player};
pub use incentive::{Mode, TriggerIndex};
pub use polytope::{CorrelationPlan, Polytope};
pub use solver::{SolveConfig, SolveStats, StepSize, Workspace};
