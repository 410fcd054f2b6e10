//! Exhaustive reference computations for small games: reduced plans, the map
//! from joint plan distributions to correlation plans, and incentive checks
//! over every pure deviation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{GameTree, Node, Player, SeqId, SequenceForm, EMPTY_SEQ};
use crate::polytope::{CorrelationPlan, Polytope};

pub const DEFAULT_PLAN_CAP: u128 = 1_000_000;

/// A reduced-normal-form plan: an action for exactly the infosets the plan
/// itself can reach, indexed by local infoset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedPlan {
    pub player: Player,
    pub choice: Vec<Option<usize>>,
}

impl ReducedPlan {
    /// Whether the plan reaches and plays every action of `s`.
    pub fn plays(&self, form: &SequenceForm, mut s: SeqId) -> bool {
        while let Some(k) = form.seq_infoset[s] {
            if self.choice[k] != Some(form.seq_action[s]) {
                return false;
            }
            s = form.parent_seq[k];
        }
        true
    }

    /// Like [`ReducedPlan::plays`] for a plan of the subforest rooted at local
    /// infoset `root`: checks the actions of `s` from `root` downwards.
    pub fn plays_below(&self, form: &SequenceForm, mut s: SeqId, root: usize) -> bool {
        while let Some(k) = form.seq_infoset[s] {
            if self.choice[k] != Some(form.seq_action[s]) {
                return false;
            }
            if k == root {
                return true;
            }
            s = form.parent_seq[k];
        }
        false
    }
}

fn count_below(form: &SequenceForm, s: SeqId) -> u128 {
    form.children[s]
        .iter()
        .map(|&k| {
            (0..form.n_actions[k]).map(|a| count_below(form, form.first_seq[k] + a)).fold(0u128, u128::saturating_add)
        })
        .fold(1u128, u128::saturating_mul)
}

/// Partial assignments for the infosets under the given root infosets.
fn assignments(form: &SequenceForm, roots: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let mut out: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for &k in roots {
        let mut options = vec![];
        for a in 0..form.n_actions[k] {
            for mut rest in assignments(form, &form.children[form.first_seq[k] + a]) {
                rest.push((k, a));
                options.push(rest);
            }
        }
        out = out
            .iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(o);
                    v
                })
            })
            .collect();
    }
    out
}

fn to_plans(form: &SequenceForm, p: Player, list: Vec<Vec<(usize, usize)>>) -> Vec<ReducedPlan> {
    let mut plans: Vec<ReducedPlan> = list
        .into_iter()
        .map(|asg| {
            let mut choice = vec![None; form.n_infosets()];
            for (k, a) in asg {
                choice[k] = Some(a);
            }
            ReducedPlan { player: p, choice }
        })
        .collect();
    plans.sort();
    plans
}

/// All reduced plans of `p`, sorted.
pub fn enumerate_plans(game: &GameTree, p: Player, cap: u128) -> Result<Vec<ReducedPlan>> {
    let form = game.form(p);
    let count = count_below(form, EMPTY_SEQ);
    if count > cap {
        return Err(Error::TooLarge { what: "reduced plans", count, cap });
    }
    Ok(to_plans(form, p, assignments(form, &form.children[EMPTY_SEQ])))
}

/// Reduced plans of the subforest rooted at local infoset `k`.
pub fn enumerate_plans_at(game: &GameTree, p: Player, k: usize, cap: u128) -> Result<Vec<ReducedPlan>> {
    let form = game.form(p);
    let count =
        (0..form.n_actions[k]).map(|a| count_below(form, form.first_seq[k] + a)).fold(0u128, u128::saturating_add);
    if count > cap {
        return Err(Error::TooLarge { what: "reduced plans", count, cap });
    }
    Ok(to_plans(form, p, assignments(form, &[k])))
}

/// A distribution over pairs of reduced plans, row-major in `(plan₁, plan₂)`.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    pub plans: [Vec<ReducedPlan>; 2],
    pub probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(game: &GameTree, cap: u128) -> Result<Self> {
        let plans = [enumerate_plans(game, Player::One, cap)?, enumerate_plans(game, Player::Two, cap)?];
        let n = plans[0].len() as u128 * plans[1].len() as u128;
        if n > cap {
            return Err(Error::TooLarge { what: "plan pairs", count: n, cap });
        }
        let probs = vec![0.0; n as usize];
        Ok(JointDistribution { plans, probs })
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.plans[1].len() + j]
    }

    pub fn point_mass(mut self, i: usize, j: usize) -> Self {
        self.probs.fill(0.0);
        let n2 = self.plans[1].len();
        self.probs[i * n2 + j] = 1.0;
        self
    }

    /// Random weights `−ln U` normalized to sum to one (a flat Dirichlet draw),
    /// with `U` uniform on `(0, 1]` from a ChaCha8 stream seeded by `seed`.
    pub fn random(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in self.probs.iter_mut() {
            let u: f64 = 1.0 - rng.gen::<f64>();
            *p = -u.ln();
        }
        let total: f64 = self.probs.iter().sum();
        for p in self.probs.iter_mut() {
            *p /= total;
        }
        self
    }
}

/// `ξ[σ₁, σ₂] = Σ μ(π₁, π₂)` over plan pairs playing both sequences.
pub fn xi_from_mu(poly: &Polytope, mu: &JointDistribution) -> CorrelationPlan {
    let game = poly.game;
    let compat: [Vec<Vec<usize>>; 2] = Player::BOTH.map(|p| {
        let form = game.form(p);
        (0..form.n_sequences())
            .map(|s| (0..mu.plans[p.index()].len()).filter(|&i| mu.plans[p.index()][i].plays(form, s)).collect())
            .collect()
    });
    let values = (0..poly.pairs.len())
        .map(|k| {
            let (s1, s2) = poly.pairs.pair(k);
            let mut acc = 0.0;
            for &i in &compat[0][s1] {
                for &j in &compat[1][s2] {
                    acc += mu.prob(i, j);
                }
            }
            acc
        })
        .collect();
    CorrelationPlan { values }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationCheck {
    pub player: Player,
    pub trigger: SeqId,
    pub plan: ReducedPlan,
    pub value: f64,
}

#[derive(Clone, Debug, Default)]
pub struct EfceReport {
    /// Deviations whose value exceeds the tolerance.
    pub violations: Vec<DeviationCheck>,
    /// Best pure deviation value per trigger, in trigger enumeration order.
    pub best: Vec<(Player, SeqId, f64)>,
    pub checked: usize,
}

impl EfceReport {
    pub fn max_value(&self) -> f64 {
        self.best.iter().map(|b| b.2).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Checks every trigger against every pure deviation plan at the level of `ξ`.
///
/// The trigger agent's terminal distribution is assembled case by case:
/// terminals outside the trigger's infoset and terminals reached after a
/// different recommendation there keep their compliance probability; terminals
/// below the infoset after recommendation `σ̂` are reached with
/// `ξ_i(σ̂; z)` when the deviation plan plays `σ_i(z)`.
pub fn check_efce(poly: &Polytope, xi: &CorrelationPlan, eps: f64, cap: u128) -> Result<EfceReport> {
    let game = poly.game;
    let x = &xi.values;
    let n_term = game.terminals().len();
    let follow: Vec<f64> = (0..n_term).map(|t| x[poly.terminals.pair[t] as usize]).collect();
    let mut report = EfceReport::default();
    for p in Player::BOTH {
        let form = game.form(p);
        let pi = p.index();
        for trigger in 1..form.n_sequences() {
            let part = game.terminal_partition(p, trigger)?;
            let k = form.seq_infoset[trigger].expect("non-empty");
            let compliant: f64 = (0..n_term).map(|t| game.payoffs(t)[pi] * follow[t]).sum();
            let mut best = f64::NEG_INFINITY;
            for plan in enumerate_plans_at(game, p, k, cap)? {
                let mut prob = vec![0.0; n_term];
                for &t in part.outside.iter().chain(&part.info) {
                    prob[t] += follow[t];
                }
                for &t in part.trig.iter().chain(&part.info) {
                    let own = game.terminal_seq(t, p);
                    if plan.plays_below(form, own, k) {
                        let other = game.terminal_seq(t, p.opponent());
                        let w = poly.pairs.index_for(p, trigger, other).expect("relevant weight");
                        prob[t] += x[w];
                    }
                }
                let deviating: f64 = (0..n_term).map(|t| game.payoffs(t)[pi] * prob[t]).sum();
                let value = deviating - compliant;
                report.checked += 1;
                best = best.max(value);
                if value > eps {
                    report.violations.push(DeviationCheck { player: p, trigger, plan, value });
                }
            }
            report.best.push((p, trigger, best));
        }
    }
    Ok(report)
}

/// Trigger-agent gain for a joint plan distribution, by playing out every plan
/// pair on the tree. Returns the best pure deviation value per trigger in
/// enumeration order.
pub fn simulate_triggers(game: &GameTree, mu: &JointDistribution, cap: u128) -> Result<Vec<(Player, SeqId, f64)>> {
    let mut out = vec![];
    for p in Player::BOTH {
        let form = game.form(p);
        for trigger in 1..form.n_sequences() {
            let k = form.seq_infoset[trigger].expect("non-empty");
            let (hat_infoset, hat_action) = (form.infosets[k], form.seq_action[trigger]);
            let mut best = f64::NEG_INFINITY;
            for dev in enumerate_plans_at(game, p, k, cap)? {
                let mut gain = 0.0;
                for (i, pl1) in mu.plans[0].iter().enumerate() {
                    for (j, pl2) in mu.plans[1].iter().enumerate() {
                        let m = mu.prob(i, j);
                        if m == 0.0 {
                            continue;
                        }
                        let recs = [pl1, pl2];
                        let base = play(game, recs, None);
                        let trig = Some((p, hat_infoset, hat_action, &dev));
                        let devz = play(game, recs, trig);
                        gain += m * (game.payoffs(devz)[p.index()] - game.payoffs(base)[p.index()]);
                    }
                }
                best = best.max(gain);
            }
            out.push((p, trigger, best));
        }
    }
    Ok(out)
}

/// Walks the tree from the root and returns the terminal index reached. With a
/// trigger, its owner switches to the deviation plan once recommended `â` at `Î`.
fn play(game: &GameTree, recs: [&ReducedPlan; 2], trigger: Option<(Player, usize, usize, &ReducedPlan)>) -> usize {
    let mut v = game.root();
    let mut switched = false;
    loop {
        match game.node(v) {
            Node::Terminal { .. } => return game.terminals().binary_search(&v).expect("terminal listed"),
            Node::Decision { player, infoset, children } => {
                let form = game.form(*player);
                let k = form.local(*infoset).expect("known infoset");
                let mine = trigger.filter(|t| t.0 == *player);
                let a = match mine {
                    Some((_, _, _, dev)) if switched => dev.choice[k].expect("deviation plan covers reached infosets"),
                    _ => {
                        let rec = recs[player.index()].choice[k].expect("reduced plan covers reached infosets");
                        match mine {
                            Some((_, ti, ta, dev)) if *infoset == ti && rec == ta => {
                                switched = true;
                                dev.choice[k].expect("deviation plan covers its root")
                            }
                            _ => rec,
                        }
                    }
                };
                v = children[a];
            }
        }
    }
}

/// Random joint distribution helper: a seeded draw for each of `count` seeds.
pub fn random_distributions(game: &GameTree, count: usize, seed: u64, cap: u128) -> Result<Vec<JointDistribution>> {
    let base = JointDistribution::new(game, cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| base.clone().random(rng.gen())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_sheriff, SheriffParams};

    fn sheriff(nmax: usize, bmax: usize, r: usize) -> GameTree {
        gen_sheriff(&SheriffParams::new(5.0, 1.0, 1.0, nmax, bmax, r)).unwrap()
    }

    #[test]
    fn plan_counts() {
        let g = sheriff(1, 0, 1);
        assert_eq!(enumerate_plans(&g, Player::One, DEFAULT_PLAN_CAP).unwrap().len(), 2);
        let g = sheriff(1, 1, 1);
        assert_eq!(enumerate_plans(&g, Player::Two, DEFAULT_PLAN_CAP).unwrap().len(), 4);
    }

    #[test]
    fn absent_player_has_one_plan() {
        let mut b = crate::game::GameBuilder::new();
        let root = b.decision(Player::One, "r".into(), &["a".into(), "b".into()]);
        let x = b.terminal([1.0, 0.0]);
        let y = b.terminal([0.0, 1.0]);
        b.set_child(root, 0, x);
        b.set_child(root, 1, y);
        let g = b.finish(["a", "b"]);
        assert_eq!(enumerate_plans(&g, Player::Two, DEFAULT_PLAN_CAP).unwrap().len(), 1);
    }

    #[test]
    fn cap_enforced() {
        let g = sheriff(2, 2, 2);
        assert!(matches!(enumerate_plans(&g, Player::One, 10), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn uniform_mass_normalizes() {
        let g = sheriff(1, 1, 1);
        let poly = Polytope::new(&g);
        let mu = JointDistribution::new(&g, DEFAULT_PLAN_CAP).unwrap().random(3);
        let xi = xi_from_mu(&poly, &mu);
        assert!((xi.values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inspecting_full_cargo_is_violated() {
        // Smuggler loads one item, Sheriff inspects: the Smuggler prefers loading nothing.
        let g = sheriff(1, 0, 1);
        let poly = Polytope::new(&g);
        let mu = JointDistribution::new(&g, DEFAULT_PLAN_CAP).unwrap();
        let i = mu.plans[0].iter().position(|p| p.choice[0] == Some(1)).unwrap();
        let j = mu.plans[1].iter().position(|p| p.choice[0] == Some(1)).unwrap();
        let mu = mu.point_mass(i, j);
        let xi = xi_from_mu(&poly, &mu);
        let report = check_efce(&poly, &xi, 1e-9, DEFAULT_PLAN_CAP).unwrap();
        assert!(report.violations.iter().any(|v| v.player == Player::One && v.value > 0.0));
        let none = check_efce(&poly, &xi, f64::INFINITY, DEFAULT_PLAN_CAP).unwrap();
        assert!(none.violations.is_empty());
    }
}
