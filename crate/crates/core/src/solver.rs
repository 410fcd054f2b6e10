//! Projected subgradient method: a step on the max-deviation objective, then
//! one projection cycle X₁ → X₂ → orthant.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameTree;
use crate::incentive::{trigger_gradient, v_star, DeviationResult, Mode, TriggerIndex};
use crate::polytope::{CorrelationPlan, Polytope};
use crate::projection::{project_orthant, project_x1, project_x2, Projectors};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "eta")]
pub enum StepSize {
    Constant(f64),
    /// `η₀ / √(t+1)`.
    Diminishing(f64),
    /// `scale · f(ξ) / ‖g‖²`, using 0 as the target value.
    Polyak(f64),
}

impl StepSize {
    fn eta(&self, t: usize, objective: f64, g_norm2: f64) -> f64 {
        match *self {
            StepSize::Constant(e) => e,
            StepSize::Diminishing(e) => e / ((t + 1) as f64).sqrt(),
            StepSize::Polyak(s) => {
                if g_norm2 > 0.0 {
                    s * objective.max(0.0) / g_norm2
                } else {
                    0.0
                }
            }
        }
    }

    fn check(&self) -> Result<()> {
        let e = match *self {
            StepSize::Constant(e) | StepSize::Diminishing(e) | StepSize::Polyak(e) => e,
        };
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::InvalidParams(format!("step size must be positive, got {e}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub mode: Mode,
    pub step: StepSize,
    pub max_iters: usize,
    /// Checkpoint targets, descending; the last one is the stopping target.
    pub eps: Vec<f64>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Reserved for randomized tie-breaking; the method is deterministic.
    pub seed: u64,
    /// Before giving up on an iterate whose deviation part already meets the
    /// target, try extra projection cycles to close the feasibility residual.
    pub final_projection: bool,
    /// Record a trace row every this many iterations (0 disables the trace).
    pub sample_every: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mode: Mode::Feasibility,
            step: StepSize::Diminishing(0.1),
            max_iters: 20_000,
            eps: vec![1e-1, 1e-2, 1e-3],
            threads: None,
            seed: 0,
            final_projection: true,
            sample_every: 1,
        }
    }
}

impl SolveConfig {
    fn check(&self) -> Result<()> {
        self.step.check()?;
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidParams("eps targets must be positive".into()));
        }
        if self.eps.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParams("eps targets must be descending".into()));
        }
        Ok(())
    }

    pub fn target(&self) -> f64 {
        *self.eps.last().expect("checked non-empty")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub feas_residual: f64,
    /// Most negative entry, or 0.
    pub min_entry: f64,
    /// `max(0, v*)`.
    pub max_deviation: f64,
    /// `max(0, τ − SW)` in welfare mode.
    pub sw_shortfall: Option<f64>,
    pub social_welfare: f64,
}

impl Violation {
    pub fn metric(&self) -> f64 {
        self.feas_residual.max(-self.min_entry).max(self.max_deviation).max(self.sw_shortfall.unwrap_or(0.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub eps: f64,
    pub iteration: usize,
    pub time_s: f64,
    pub metric: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub time_s: f64,
    pub feas_residual: f64,
    pub min_entry: f64,
    pub max_deviation: f64,
    pub kappa: Option<f64>,
    pub social_welfare: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub checkpoints: Vec<Checkpoint>,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    pub final_violation: f64,
    pub converged: bool,
}

/// Everything precomputed for one game.
pub struct Workspace<'g> {
    pub poly: Polytope<'g>,
    pub triggers: TriggerIndex,
    pub projectors: Projectors,
}

impl<'g> Workspace<'g> {
    pub fn new(game: &'g GameTree) -> Result<Self> {
        let poly = Polytope::new(game);
        let triggers = TriggerIndex::build(&poly);
        let projectors = Projectors::build(&poly.consistency)?;
        Ok(Workspace { poly, triggers, projectors })
    }

    pub fn initial_plan(&self) -> CorrelationPlan {
        CorrelationPlan::uniform(self.poly.game, &self.poly.pairs)
    }

    pub fn violation(&self, xi: &[f64], mode: Mode) -> Violation {
        self.evaluate(xi, mode).0
    }

    fn evaluate(&self, xi: &[f64], mode: Mode) -> (Violation, Option<DeviationResult>) {
        let dev = v_star(&self.poly, &self.triggers, xi);
        let v = dev.as_ref().map_or(0.0, |d| d.value);
        let sw = self.poly.terminals.social_welfare(xi);
        let viol = Violation {
            feas_residual: self.poly.consistency.residual(xi),
            min_entry: xi.iter().copied().fold(0.0, f64::min),
            max_deviation: v.max(0.0),
            sw_shortfall: match mode {
                Mode::Feasibility => None,
                Mode::MaxSocialWelfare { threshold } => Some((threshold - sw).max(0.0)),
            },
            social_welfare: sw,
        };
        (viol, dev)
    }

    /// One projection cycle.
    pub fn project_cycle(&self, xi: &mut [f64]) {
        project_x1(&self.poly.consistency, &self.projectors, xi);
        project_x2(&self.poly.consistency, &self.projectors, xi);
        project_orthant(xi);
    }

    pub fn solve(&self, cfg: &SolveConfig) -> Result<(CorrelationPlan, SolveStats)> {
        self.solve_from(self.initial_plan(), cfg)
    }

    /// Runs the method from `start`.
    pub fn solve_from(&self, start: CorrelationPlan, cfg: &SolveConfig) -> Result<(CorrelationPlan, SolveStats)> {
        cfg.check()?;
        if start.len() != self.poly.pairs.len() {
            return Err(Error::IndexMismatch(format!(
                "plan has {} entries, game has {} relevant pairs",
                start.len(),
                self.poly.pairs.len()
            )));
        }
        match cfg.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParams(e.to_string()))?
                .install(|| self.run(start, cfg)),
            None => self.run(start, cfg),
        }
    }

    fn run(&self, start: CorrelationPlan, cfg: &SolveConfig) -> Result<(CorrelationPlan, SolveStats)> {
        let clock = Instant::now();
        let target = cfg.target();
        let mut xi = start.values;
        let mut stats = SolveStats::default();
        let mut pending: Vec<f64> = cfg.eps.clone();
        let mut best: Option<(f64, Vec<f64>)> = None;

        for t in 0..=cfg.max_iters {
            let (viol, dev) = self.evaluate(&xi, cfg.mode);
            let mut metric = viol.metric();
            let mut polished = None;
            if metric > target && cfg.final_projection && deviation_part(&viol) <= target {
                let mut copy = xi.clone();
                for _ in 0..POLISH_CYCLES {
                    self.project_cycle(&mut copy);
                    if self.poly.consistency.residual(&copy) <= target * 0.5 {
                        break;
                    }
                }
                let m = self.violation(&copy, cfg.mode).metric();
                if m <= target {
                    metric = m;
                    polished = Some(copy);
                }
            }
            let elapsed = clock.elapsed().as_secs_f64();
            if cfg.sample_every > 0 && t % cfg.sample_every == 0 {
                stats.trace.push(TraceRow {
                    iteration: t,
                    time_s: elapsed,
                    feas_residual: viol.feas_residual,
                    min_entry: viol.min_entry,
                    max_deviation: viol.max_deviation,
                    kappa: match cfg.mode {
                        Mode::Feasibility => None,
                        Mode::MaxSocialWelfare { threshold } => Some(threshold - viol.social_welfare),
                    },
                    social_welfare: viol.social_welfare,
                });
            }
            while pending.first().is_some_and(|&e| metric <= e) {
                let eps = pending.remove(0);
                stats.checkpoints.push(Checkpoint { eps, iteration: t, time_s: elapsed, metric });
            }
            if let Some(p) = polished {
                xi = p;
            }
            if best.as_ref().is_none_or(|(m, _)| metric < *m) {
                best = Some((metric, xi.clone()));
            }
            stats.iterations = t;
            stats.final_violation = metric;
            if metric <= target {
                stats.converged = true;
                return Ok((CorrelationPlan { values: xi }, stats));
            }
            if t == cfg.max_iters {
                break;
            }

            let (objective, grad) = self.step_direction(&xi, &viol, dev, cfg.mode);
            let g_norm2 = sparse_norm2(&grad, xi.len());
            let eta = cfg.step.eta(t, objective, g_norm2);
            for (k, g) in grad {
                xi[k] -= eta * g;
            }
            self.project_cycle(&mut xi);
        }
        let (m, values) = best.expect("at least one iterate");
        stats.final_violation = m;
        Err(Error::DidNotConverge { plan: Box::new(CorrelationPlan { values }), stats: Box::new(stats) })
    }

    fn step_direction(
        &self,
        xi: &[f64],
        viol: &Violation,
        dev: Option<DeviationResult>,
        mode: Mode,
    ) -> (f64, Vec<(usize, f64)>) {
        let v = dev.as_ref().map_or(0.0, |d| d.value);
        if let Mode::MaxSocialWelfare { threshold } = mode {
            let kappa = threshold - viol.social_welfare;
            if !(v >= kappa) {
                let t = &self.poly.terminals;
                let g = t.pair.iter().zip(&t.payoffs).map(|(&k, u)| (k as usize, -(u[0] + u[1]))).collect();
                return (kappa, g);
            }
        }
        debug_assert!(xi.len() == self.poly.pairs.len());
        match dev {
            Some(d) => (v, trigger_gradient(&self.poly, &self.triggers, &d)),
            None => (v, vec![]),
        }
    }

    /// Maximizes social welfare by bisection on the threshold of welfare mode.
    ///
    /// The lower end starts at the welfare of a feasibility solve and the upper
    /// end at the largest terminal welfare. Each bisection step reuses the
    /// best plan found so far as the starting point.
    pub fn maximize_welfare(&self, cfg: &SolveConfig, steps: usize) -> Result<WelfareResult> {
        let mut feas_cfg = cfg.clone();
        feas_cfg.mode = Mode::Feasibility;
        let (mut plan, mut stats) = self.solve(&feas_cfg)?;
        let mut lo = self.poly.social_welfare(&plan);
        let mut hi = self.poly.terminals.payoffs.iter().map(|u| u[0] + u[1]).fold(f64::NEG_INFINITY, f64::max);
        let mut solves = 1;
        for _ in 0..steps {
            if hi - lo <= cfg.target() * 1e-3 {
                break;
            }
            let tau = 0.5 * (lo + hi);
            let mut c = cfg.clone();
            c.mode = Mode::MaxSocialWelfare { threshold: tau };
            solves += 1;
            match self.solve_from(plan.clone(), &c) {
                Ok((p, s)) => {
                    lo = tau;
                    plan = p;
                    stats = s;
                }
                Err(Error::DidNotConverge { .. }) => hi = tau,
                Err(e) => return Err(e),
            }
        }
        let social_welfare = self.poly.social_welfare(&plan);
        Ok(WelfareResult { plan, stats, lower: lo, upper: hi, social_welfare, solves })
    }
}

/// Outcome of welfare bisection.
#[derive(Clone, Debug)]
pub struct WelfareResult {
    pub plan: CorrelationPlan,
    /// Stats of the solve that produced `plan`.
    pub stats: SolveStats,
    /// Largest threshold certified by a converged solve.
    pub lower: f64,
    /// Smallest threshold at which a solve failed (or the welfare ceiling).
    pub upper: f64,
    pub social_welfare: f64,
    pub solves: usize,
}

const POLISH_CYCLES: usize = 200;

fn deviation_part(v: &Violation) -> f64 {
    v.max_deviation.max(v.sw_shortfall.unwrap_or(0.0))
}

fn sparse_norm2(g: &[(usize, f64)], n: usize) -> f64 {
    let mut dense = vec![0.0; n];
    for &(k, v) in g {
        dense[k] += v;
    }
    dense.iter().map(|v| v * v).sum()
}

/// Convenience wrapper building a workspace and solving from the uniform plan.
pub fn solve(game: &GameTree, cfg: &SolveConfig) -> Result<(CorrelationPlan, SolveStats)> {
    Workspace::new(game)?.solve(cfg)
}
