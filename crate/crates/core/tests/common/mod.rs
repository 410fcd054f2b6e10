//! Shared helpers for integration tests: an interior-point LP solve of the
//! exported models and small game fixtures.
#![allow(dead_code)]

pub mod checks;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus, ZeroConeT};
use efce_core::game::GameTree;
use efce_core::generators::{gen_battleship, gen_sheriff, BattleshipParams, SheriffParams, Ship};
use efce_core::lp::{Cmp, LpModel, Sense};

pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

/// Solves `model` with Clarabel. Panics unless the solver reports success.
pub fn solve_lp(model: &LpModel) -> LpSolution {
    let n = model.vars.len();
    let (mut ri, mut ci, mut vals, mut b) = (vec![], vec![], vec![], vec![]);
    let mut row = 0;
    let mut push = |coeffs: &[(usize, f64)], scale: f64, rhs: f64, b: &mut Vec<f64>| {
        for &(j, v) in coeffs {
            ri.push(row);
            ci.push(j);
            vals.push(scale * v);
        }
        b.push(rhs);
        row += 1;
    };
    let eqs: Vec<_> = model.constraints.iter().filter(|c| c.cmp == Cmp::Eq).collect();
    for c in &eqs {
        push(&c.coeffs, 1.0, c.rhs, &mut b);
    }
    let mut n_ineq = 0;
    for c in model.constraints.iter().filter(|c| c.cmp != Cmp::Eq) {
        match c.cmp {
            Cmp::Le => push(&c.coeffs, 1.0, c.rhs, &mut b),
            _ => push(&c.coeffs, -1.0, -c.rhs, &mut b),
        }
        n_ineq += 1;
    }
    for (j, v) in model.vars.iter().enumerate() {
        if !v.free {
            push(&[(j, -1.0)], 1.0, 0.0, &mut b);
            n_ineq += 1;
        }
    }
    let m = b.len();
    let a = CscMatrix::new_from_triplets(m, n, ri, ci, vals);
    let p = CscMatrix::zeros((n, n));
    let sign = if model.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut q = vec![0.0; n];
    for &(j, v) in &model.objective {
        q[j] += sign * v;
    }
    let cones = [ZeroConeT(eqs.len()), NonnegativeConeT(n_ineq)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(400)
        .tol_gap_abs(1e-11)
        .tol_gap_rel(1e-11)
        .tol_feas(1e-11)
        .build()
        .unwrap();
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings).unwrap();
    solver.solve();
    let status = solver.solution.status;
    assert!(matches!(status, SolverStatus::Solved | SolverStatus::AlmostSolved), "LP solve failed: {status:?}");
    let x = solver.solution.x.clone();
    let objective = model.objective.iter().map(|&(j, v)| v * x[j]).sum();
    LpSolution { objective, x }
}

pub fn battleship_3x1(gamma: f64) -> GameTree {
    gen_battleship(&BattleshipParams::new(3, 1, vec![Ship { length: 1, value: 1.0 }], 2, gamma)).unwrap()
}

pub fn battleship_2x1(rounds: usize) -> GameTree {
    gen_battleship(&BattleshipParams::new(2, 1, vec![Ship { length: 1, value: 1.0 }], rounds, 2.0)).unwrap()
}

pub fn sheriff(nmax: usize, bmax: usize, rounds: usize) -> GameTree {
    gen_sheriff(&SheriffParams::new(5.0, 1.0, 1.0, nmax, bmax, rounds)).unwrap()
}

/// The tiny games used for oracle comparisons.
pub fn tiny_games() -> Vec<(String, GameTree)> {
    let mut out = vec![];
    for (n, b, r) in [(1, 0, 1), (1, 1, 1), (2, 1, 1), (1, 0, 2), (2, 0, 2), (1, 1, 2)] {
        out.push((format!("sheriff({n},{b},{r})"), sheriff(n, b, r)));
    }
    out.push(("battleship 2x1 r=1".into(), battleship_2x1(1)));
    out.push(("battleship 2x1 r=2".into(), battleship_2x1(2)));
    out
}

/// Random two-player perfect-recall tree. Infosets are keyed by the owner's
/// own history plus the opponent actions it happened to observe, so every
/// member of an infoset shares the action count derived from its key.
pub fn random_game(seed: u64, max_depth: usize) -> GameTree {
    use efce_core::game::{GameBuilder, Player};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn actions_for(key: &str) -> usize {
        let h = key.bytes().fold(7u64, |h, b| h.wrapping_mul(31).wrapping_add(b as u64));
        2 + (h % 2) as usize
    }

    fn grow(b: &mut GameBuilder, rng: &mut ChaCha8Rng, keys: [String; 2], depth: usize) -> usize {
        if depth == 0 || (depth < 3 && rng.gen_bool(0.3)) {
            let u = [rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64];
            return b.terminal(u);
        }
        let p = if rng.gen_bool(0.5) { Player::One } else { Player::Two };
        let key = keys[p.index()].clone();
        let n = actions_for(&key);
        let labels: Vec<String> = (0..n).map(|a| format!("a{a}")).collect();
        let node = b.decision(p, key.clone(), &labels);
        for a in 0..n {
            let mut next = keys.clone();
            next[p.index()] = format!("{key}[{a}]");
            if rng.gen_bool(0.5) {
                let o = p.opponent().index();
                next[o] = format!("{}<{a}>", next[o]);
            }
            let child = grow(b, rng, next, depth - 1);
            b.set_child(node, a, child);
        }
        node
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GameBuilder::new();
    grow(&mut b, &mut rng, [String::new(), String::new()], max_depth);
    b.finish(["P1", "P2"])
}
