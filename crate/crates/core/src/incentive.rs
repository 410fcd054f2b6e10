//! Trigger-agent deviation values and subgradients of the max-deviation
//! objective, computed by traversing each deviator's infoset subforest.
//!
//! For a trigger `σ̂ = (Î, â)` of player `i` the value is
//!
//! ```text
//! max_y  Σ_{z below Î} u_i(z) ξ_i(σ̂; z) y(σ_i(z))  −  Σ_{z below (Î, â)} u_i(z) ξ[σ₁(z), σ₂(z)]
//! ```
//!
//! where `y` ranges over sequence-form plans of `i` rooted at `Î` and
//! `ξ_1(σ̂; z) = ξ[σ̂, σ₂(z)]`, `ξ_2(σ̂; z) = ξ[σ₁(z), σ̂]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Player, SeqId};
use crate::polytope::Polytope;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    Feasibility,
    /// Minimize `max(v*, τ − SW)`.
    MaxSocialWelfare {
        threshold: f64,
    },
}

#[derive(Clone, Debug, Default)]
struct PlayerTriggers {
    /// Terminals below each local infoset as `(terminal, own sequence)`, by sequence.
    below: Vec<Vec<(u32, u32)>>,
    /// Per sequence, the pair index `ξ_i(σ̂; z)` for each entry of `below[infoset(σ̂)]`.
    weight: Vec<Vec<u32>>,
    /// Per sequence, terminals reached through it.
    trig: Vec<Vec<u32>>,
}

/// Precomputed weight slots for every trigger of both players.
#[derive(Clone, Debug)]
pub struct TriggerIndex {
    players: [PlayerTriggers; 2],
    /// `(player, sequence)` in enumeration order: player 1 first, then by sequence id.
    order: Vec<(Player, SeqId)>,
}

impl TriggerIndex {
    pub fn build(poly: &Polytope) -> TriggerIndex {
        let game = poly.game;
        let players = Player::BOTH.map(|p| {
            let form = game.form(p);
            let mut pt = PlayerTriggers {
                below: vec![vec![]; form.n_infosets()],
                weight: vec![vec![]; form.n_sequences()],
                trig: vec![vec![]; form.n_sequences()],
            };
            let mut by_seq: Vec<Vec<u32>> = vec![vec![]; form.n_sequences()];
            for t in 0..game.terminals().len() {
                by_seq[game.terminal_seq(t, p)].push(t as u32);
            }
            for (s, ts) in by_seq.iter().enumerate() {
                let mut cur = s;
                while let Some(k) = form.seq_infoset[cur] {
                    pt.below[k].extend(ts.iter().map(|&t| (t, s as u32)));
                    pt.trig[cur].extend_from_slice(ts);
                    cur = form.parent_seq[k];
                }
            }
            for s in 1..form.n_sequences() {
                let k = form.seq_infoset[s].expect("non-empty sequence");
                pt.weight[s] = pt.below[k]
                    .iter()
                    .map(|&(t, _)| {
                        let other = game.terminal_seq(t as usize, p.opponent());
                        poly.pairs.index_for(p, s, other).expect("weight pair is relevant") as u32
                    })
                    .collect();
                pt.trig[s].sort_unstable();
            }
            pt
        });
        let order = Player::BOTH.iter().flat_map(|&p| (1..game.form(p).n_sequences()).map(move |s| (p, s))).collect();
        TriggerIndex { players, order }
    }

    /// All triggers in the fixed enumeration order.
    pub fn triggers(&self) -> &[(Player, SeqId)] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationResult {
    pub player: Player,
    pub trigger: SeqId,
    pub value: f64,
    /// Expected utility of following the recommendations, `Σ_{z below σ̂} u_i(z) ξ[σ₁(z), σ₂(z)]`.
    pub base: f64,
    /// Support of the pure best-response plan: the deviator sequences with `y = 1`, ascending.
    pub y: Vec<SeqId>,
}

pub fn deviation_value(
    poly: &Polytope,
    index: &TriggerIndex,
    xi: &[f64],
    p: Player,
    trigger: SeqId,
) -> Result<DeviationResult> {
    let form = poly.game.form(p);
    let k = match form.seq_infoset.get(trigger) {
        Some(Some(k)) => *k,
        _ => return Err(Error::UnknownSequence { player: p, seq: trigger }),
    };
    let pt = &index.players[p.index()];
    let payoffs = &poly.terminals.payoffs;
    let (lo, hi) = (form.first_seq[k], form.subtree_seq_end[k]);
    let (klo, khi) = (k, form.subtree_end[k]);

    let mut seq_val = vec![0.0; hi - lo];
    for (&(t, s), &w) in pt.below[k].iter().zip(&pt.weight[trigger]) {
        seq_val[s as usize - lo] += payoffs[t as usize][p.index()] * xi[w as usize];
    }
    let mut inf_val = vec![0.0; khi - klo];
    let mut choice = vec![0usize; khi - klo];
    for j in (klo..khi).rev() {
        let first = form.first_seq[j];
        let mut best = f64::NEG_INFINITY;
        for a in 0..form.n_actions[j] {
            let s = first + a;
            let v = seq_val[s - lo] + form.children[s].iter().map(|&c| inf_val[c - klo]).sum::<f64>();
            seq_val[s - lo] = v;
            if v > best {
                best = v;
                choice[j - klo] = a;
            }
        }
        inf_val[j - klo] = best;
    }

    let mut on = vec![false; hi - lo];
    let mut y = vec![];
    for j in klo..khi {
        if j == klo || on[form.parent_seq[j] - lo] {
            let s = form.first_seq[j] + choice[j - klo];
            on[s - lo] = true;
            y.push(s);
        }
    }
    y.sort_unstable();

    let base: f64 = pt.trig[trigger]
        .iter()
        .map(|&t| payoffs[t as usize][p.index()] * xi[poly.terminals.pair[t as usize] as usize])
        .sum();
    Ok(DeviationResult { player: p, trigger, value: inf_val[0] - base, base, y })
}

/// Every trigger's deviation value, in enumeration order.
pub fn all_deviations(poly: &Polytope, index: &TriggerIndex, xi: &[f64]) -> Vec<DeviationResult> {
    index.order.par_iter().map(|&(p, s)| deviation_value(poly, index, xi, p, s).expect("indexed trigger")).collect()
}

/// Largest deviation value over all triggers; `None` when no player ever acts.
/// Ties go to the trigger earliest in enumeration order.
pub fn v_star(poly: &Polytope, index: &TriggerIndex, xi: &[f64]) -> Option<DeviationResult> {
    index
        .order
        .par_iter()
        .enumerate()
        .map(|(i, &(p, s))| (i, deviation_value(poly, index, xi, p, s).expect("indexed trigger")))
        .reduce_with(|a, b| if b.1.value > a.1.value || (b.1.value == a.1.value && b.0 < a.0) { b } else { a })
        .map(|(_, r)| r)
}

/// `v*(ξ)` with the convention that a game without triggers has value 0.
pub fn max_deviation(poly: &Polytope, index: &TriggerIndex, xi: &[f64]) -> f64 {
    v_star(poly, index, xi).map_or(0.0, |r| r.value)
}

/// Gradient of the linear piece selected by `dev`, as `(pair index, coefficient)` entries.
pub fn trigger_gradient(poly: &Polytope, index: &TriggerIndex, dev: &DeviationResult) -> Vec<(usize, f64)> {
    let p = dev.player;
    let form = poly.game.form(p);
    let k = form.seq_infoset[dev.trigger].expect("non-empty trigger");
    let pt = &index.players[p.index()];
    let payoffs = &poly.terminals.payoffs;
    let mut g = vec![];
    for (&(t, s), &w) in pt.below[k].iter().zip(&pt.weight[dev.trigger]) {
        if dev.y.binary_search(&(s as usize)).is_ok() {
            g.push((w as usize, payoffs[t as usize][p.index()]));
        }
    }
    for &t in &pt.trig[dev.trigger] {
        g.push((poly.terminals.pair[t as usize] as usize, -payoffs[t as usize][p.index()]));
    }
    g
}

/// Objective value and one subgradient at `xi`.
///
/// In welfare mode the objective is `max(v*, τ − SW)`; the trigger piece wins ties.
pub fn subgradient(poly: &Polytope, index: &TriggerIndex, xi: &[f64], mode: Mode) -> (f64, Vec<(usize, f64)>) {
    let dev = v_star(poly, index, xi);
    let v = dev.as_ref().map_or(0.0, |d| d.value);
    if let Mode::MaxSocialWelfare { threshold } = mode {
        let kappa = threshold - poly.terminals.social_welfare(xi);
        if !(v >= kappa) {
            let g = poly
                .terminals
                .pair
                .iter()
                .zip(&poly.terminals.payoffs)
                .map(|(&k, u)| (k as usize, -(u[0] + u[1])))
                .collect();
            return (kappa, g);
        }
    }
    match dev {
        Some(d) => (v, trigger_gradient(poly, index, &d)),
        None => (v, vec![]),
    }
}
