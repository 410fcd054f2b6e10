//! Sheriff: a bargaining game between a Smuggler (Player 1) and a Sheriff
//! (Player 2).
//!
//! The Smuggler privately loads `n` illegal items, then `rounds` public
//! bargaining rounds follow: a bribe proposal and a yes/no answer. Only the
//! last round decides the outcome; a final "no" means the cargo is inspected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameBuilder, GameTree, NodeId, Player};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheriffParams {
    /// Value of each smuggled item.
    pub item_value: f64,
    /// Fine per discovered item.
    pub penalty: f64,
    /// Compensation paid to the Smuggler on a false alarm.
    pub compensation: f64,
    pub max_items: usize,
    pub max_bribe: usize,
    pub rounds: usize,
    #[serde(default = "default_cap")]
    pub node_cap: usize,
}

fn default_cap() -> usize {
    super::DEFAULT_NODE_CAP
}

impl SheriffParams {
    pub fn new(v: f64, p: f64, s: f64, max_items: usize, max_bribe: usize, rounds: usize) -> Self {
        SheriffParams {
            item_value: v,
            penalty: p,
            compensation: s,
            max_items,
            max_bribe,
            rounds,
            node_cap: default_cap(),
        }
    }

    /// The `v=5, p=1, s=1, n_max=10, b_max=2, r=2` instance.
    pub fn baseline() -> Self {
        Self::new(5.0, 1.0, 1.0, 10, 2, 2)
    }

    fn node_count(&self) -> u128 {
        // Smuggler root, then per item count a chain of (bribe, answer) layers.
        let branch = (self.max_bribe as u128 + 1) * 2;
        let mut per_n: u128 = 0;
        let mut width: u128 = 1;
        for _ in 0..self.rounds {
            per_n = per_n.saturating_add(width); // bribe nodes
            per_n = per_n.saturating_add(width.saturating_mul(self.max_bribe as u128 + 1)); // answer nodes
            width = width.saturating_mul(branch);
        }
        per_n = per_n.saturating_add(width);
        1u128.saturating_add((self.max_items as u128 + 1).saturating_mul(per_n))
    }
}

pub fn gen_sheriff(params: &SheriffParams) -> Result<GameTree> {
    for (name, x) in [("v", params.item_value), ("p", params.penalty), ("s", params.compensation)] {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} must be a finite nonnegative number")));
        }
    }
    if params.rounds == 0 {
        return Err(Error::InvalidParams("rounds must be at least 1".into()));
    }
    let count = params.node_count();
    if count > params.node_cap as u128 {
        return Err(Error::TooLarge { what: "sheriff tree nodes", count, cap: params.node_cap as u128 });
    }

    let mut b = GameBuilder::new();
    let loads: Vec<String> = (0..=params.max_items).map(|n| format!("load:{n}")).collect();
    let bribes: Vec<String> = (0..=params.max_bribe).map(|x| format!("bribe:{x}")).collect();
    let answers = ["yes".to_string(), "no".to_string()];

    let root = b.decision(Player::One, "load".into(), &loads);
    for n in 0..=params.max_items {
        let child = bargain(&mut b, params, &bribes, &answers, n, 1, String::new());
        b.set_child(root, n, child);
    }
    Ok(b.finish(["Smuggler", "Sheriff"]))
}

fn bargain(
    b: &mut GameBuilder,
    params: &SheriffParams,
    bribes: &[String],
    answers: &[String],
    n: usize,
    round: usize,
    history: String,
) -> NodeId {
    let offer = b.decision(Player::One, format!("n={n}|{history}"), bribes);
    for bribe in 0..=params.max_bribe {
        let seen = format!("{history}b{bribe}");
        let answer = b.decision(Player::Two, seen.clone(), answers);
        for (a, label) in ["y", "n"].iter().enumerate() {
            let child = if round == params.rounds {
                b.terminal(outcome(params, n, bribe, a == 0))
            } else {
                bargain(b, params, bribes, answers, n, round + 1, format!("{seen}{label};"))
            };
            b.set_child(answer, a, child);
        }
        b.set_child(offer, bribe, answer);
    }
    offer
}

fn outcome(params: &SheriffParams, n: usize, bribe: usize, accepted: bool) -> [f64; 2] {
    let n = n as f64;
    let bribe = bribe as f64;
    if accepted {
        [n * params.item_value - bribe, bribe]
    } else if n > 0.0 {
        [-n * params.penalty, n * params.penalty]
    } else {
        [params.compensation, -params.compensation]
    }
}
