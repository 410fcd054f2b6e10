//! In-process LP solves with Clarabel.

use anyhow::{bail, Result};
use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus, ZeroConeT};
use efce_core::lp::{Cmp, LpModel, Sense};

pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

pub fn solve(model: &LpModel) -> Result<LpSolution> {
    let n = model.vars.len();
    let (mut ri, mut ci, mut vals, mut b) = (vec![], vec![], vec![], vec![]);
    let mut push = |coeffs: &[(usize, f64)], scale: f64, rhs: f64| {
        let row = b.len();
        for &(j, v) in coeffs {
            ri.push(row);
            ci.push(j);
            vals.push(scale * v);
        }
        b.push(rhs);
    };
    let mut n_eq = 0;
    for c in model.constraints.iter().filter(|c| c.cmp == Cmp::Eq) {
        push(&c.coeffs, 1.0, c.rhs);
        n_eq += 1;
    }
    for c in model.constraints.iter().filter(|c| c.cmp != Cmp::Eq) {
        match c.cmp {
            Cmp::Le => push(&c.coeffs, 1.0, c.rhs),
            _ => push(&c.coeffs, -1.0, -c.rhs),
        }
    }
    for (j, v) in model.vars.iter().enumerate() {
        if !v.free {
            push(&[(j, -1.0)], 1.0, 0.0);
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
    let cones = [ZeroConeT(n_eq), NonnegativeConeT(m - n_eq)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(400)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .tol_feas(1e-10)
        .build()
        .expect("valid settings");
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)?;
    solver.solve();
    let status = solver.solution.status;
    if !matches!(status, SolverStatus::Solved | SolverStatus::AlmostSolved) {
        bail!("LP solver finished with status {status:?}");
    }
    let x = solver.solution.x.clone();
    let objective = model.objective.iter().map(|&(j, v)| v * x[j]).sum();
    Ok(LpSolution { objective, x })
}
