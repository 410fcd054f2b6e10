//! Projection checks shared by the projection tests and the acceptance run.

use std::collections::{BTreeMap, HashMap};

use efce_core::game::GameTree;
use efce_core::polytope::{ConstraintSystem, FlowRow};
use efce_core::projection::{factorize, gram, AffineProjector, Cholesky};
use efce_core::Polytope;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `FFᵀ` assembled from the infoset structure of the fixed player's tree,
/// without looking at `F` itself.
pub fn closed_form_gram(game: &GameTree, sys: &ConstraintSystem) -> Vec<BTreeMap<usize, i64>> {
    let form = game.form(sys.player);
    let n = sys.rows.len();
    let mut out = vec![BTreeMap::new(); n];
    // parent sequence of each row; the normalization row has none
    let parent: Vec<Option<usize>> = sys.rows.iter().map(|r| r.infoset.map(|k| form.parent_seq[k as usize])).collect();
    for i in 0..n {
        let diag = match sys.rows[i].infoset {
            Some(k) => 1 + form.n_actions[k as usize] as i64,
            None => 1,
        };
        out[i].insert(i, diag);
        for j in i + 1..n {
            let v = match (sys.rows[i].infoset, sys.rows[j].infoset) {
                (None, Some(_)) => -((parent[j] == Some(0)) as i64),
                (Some(_), None) => -((parent[i] == Some(0)) as i64),
                (Some(ki), Some(kj)) => {
                    let (ki, kj) = (ki as usize, kj as usize);
                    if parent[i] == parent[j] {
                        1
                    } else if form.seq_infoset[parent[j].unwrap()] == Some(ki)
                        || form.seq_infoset[parent[i].unwrap()] == Some(kj)
                    {
                        -1
                    } else {
                        0
                    }
                }
                (None, None) => 0,
            };
            if v != 0 {
                out[i].insert(j, v);
            }
        }
    }
    out
}

/// `max |L Lᵀ − P A Pᵀ|` over all entries, with `A` given as a lower triangle.
pub fn factor_error(a: &[BTreeMap<usize, f64>], chol: &Cholesky) -> f64 {
    let n = chol.dim();
    let mut pos = vec![0; n];
    for (k, &i) in chol.perm.iter().enumerate() {
        pos[i] = k;
    }
    let mut want: HashMap<(usize, usize), f64> = HashMap::new();
    for (i, col) in a.iter().enumerate() {
        for (&j, &v) in col {
            let (r, c) = (pos[i].max(pos[j]), pos[i].min(pos[j]));
            want.insert((r, c), v);
        }
    }
    let mut got: HashMap<(usize, usize), f64> = HashMap::new();
    for col in &chol.cols {
        let entries: Vec<(usize, f64)> = col.iter().map(|(&r, &v)| (r, v)).collect();
        for (x, &(c, vc)) in entries.iter().enumerate() {
            for &(r, vr) in &entries[x..] {
                *got.entry((r, c)).or_insert(0.0) += vr * vc;
            }
        }
    }
    let mut err: f64 = 0.0;
    for (k, v) in &got {
        err = err.max((v - want.get(k).copied().unwrap_or(0.0)).abs());
    }
    for (k, v) in &want {
        if !got.contains_key(k) {
            err = err.max(v.abs());
        }
    }
    err
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Worst observed quantities over all systems of one game.
#[derive(Clone, Debug, Default)]
pub struct ProjectionReport {
    pub systems: usize,
    pub gram_mismatches: usize,
    pub fill: usize,
    pub nnz_mismatches: usize,
    pub factor_error: f64,
    pub feasibility: f64,
    pub idempotence: f64,
    pub certificate: f64,
}

impl ProjectionReport {
    pub fn passes(&self) -> bool {
        self.gram_mismatches == 0
            && self.fill == 0
            && self.nnz_mismatches == 0
            && self.factor_error <= 1e-10
            && self.feasibility <= 1e-10
            && self.idempotence <= 1e-10
            && self.certificate <= 1e-8
    }

    fn merge(&mut self, o: &ProjectionReport) {
        self.systems += o.systems;
        self.gram_mismatches += o.gram_mismatches;
        self.fill += o.fill;
        self.nnz_mismatches += o.nnz_mismatches;
        self.factor_error = self.factor_error.max(o.factor_error);
        self.feasibility = self.feasibility.max(o.feasibility);
        self.idempotence = self.idempotence.max(o.idempotence);
        self.certificate = self.certificate.max(o.certificate);
    }
}

/// Runs the per-system factor and projection checks on every column and row
/// system of `game`, projecting one random point per system.
pub fn check_game_systems(game: &GameTree, seed: u64) -> ProjectionReport {
    let poly = Polytope::new(game);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ProjectionReport::default();
    for sys in poly.consistency.systems() {
        let mut r = ProjectionReport { systems: 1, ..Default::default() };
        let a = gram(&sys.rows, sys.vars.len());
        let closed = closed_form_gram(game, sys);
        let from_f: Vec<BTreeMap<usize, i64>> =
            a.iter().map(|c| c.iter().map(|(&j, &v)| (j, v as i64)).collect()).collect();
        let integral = a.iter().all(|c| c.values().all(|v| v.fract() == 0.0));
        if !integral || from_f != closed {
            r.gram_mismatches = 1;
        }
        let chol = factorize(&sys.rows, sys.vars.len()).expect("factorization");
        r.fill = chol.fill;
        let tril: usize = a.iter().map(BTreeMap::len).sum();
        r.nnz_mismatches = (chol.nnz() != tril) as usize;
        r.factor_error = factor_error(&a, &chol);

        let proj = AffineProjector::new(sys).expect("projector");
        let w: Vec<f64> = (0..sys.vars.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut x = w.clone();
        proj.project(&mut x);
        r.feasibility = max_abs(&proj.defect(&x));
        let mut again = x.clone();
        proj.project(&mut again);
        r.idempotence = x.iter().zip(&again).fold(0.0, |m, (a, b)| m.max((a - b).abs()));
        r.certificate = row_space_residual(&sys.rows, &w, &x);
        report.merge(&r);
    }
    report
}

/// Residual of the least-squares fit of `x − w` by `Fᵀλ`, with `λ` from the
/// dense normal equations.
pub fn row_space_residual(rows: &[FlowRow], w: &[f64], x: &[f64]) -> f64 {
    let f = dense_rows(rows, w.len());
    let d: Vec<f64> = x.iter().zip(w).map(|(a, b)| a - b).collect();
    let m = f.len();
    let mut normal = vec![vec![0.0; m]; m];
    let mut fd = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            normal[i][j] = f[i].iter().zip(&f[j]).map(|(a, b)| a * b).sum();
        }
        fd[i] = f[i].iter().zip(&d).map(|(a, b)| a * b).sum();
    }
    let lambda = dense_solve(normal, fd);
    let mut worst: f64 = 0.0;
    for (c, dc) in d.iter().enumerate() {
        let fit: f64 = (0..m).map(|i| f[i][c] * lambda[i]).sum();
        worst = worst.max((fit - dc).abs());
    }
    worst
}

pub fn dense_rows(rows: &[FlowRow], n: usize) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            let mut v = vec![0.0; n];
            if let Some(p) = r.parent {
                v[p as usize] -= 1.0;
            }
            for &c in &r.children {
                v[c as usize] += 1.0;
            }
            v
        })
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Projection of `w` onto `{x : Fx = f}` from the dense KKT system
/// `[I Fᵀ; F 0] [x; λ] = [w; f]`.
pub fn dense_projection(rows: &[FlowRow], rhs: &[f64], w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let m = rows.len();
    let f = dense_rows(rows, n);
    let mut k = vec![vec![0.0; n + m]; n + m];
    for i in 0..n {
        k[i][i] = 1.0;
    }
    for (r, row) in f.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            k[c][n + r] = v;
            k[n + r][c] = v;
        }
    }
    let mut b = w.to_vec();
    b.extend_from_slice(rhs);
    dense_solve(k, b)[..n].to_vec()
}

/// Largest gap between the sparse and dense projections over the systems of
/// `game`, for `draws` random points per system.
pub fn dense_oracle_gap(game: &GameTree, draws: usize, seed: u64) -> f64 {
    let poly = Polytope::new(game);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for sys in poly.consistency.systems() {
        let proj = AffineProjector::new(sys).expect("projector");
        for _ in 0..draws {
            let w: Vec<f64> = (0..sys.vars.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut x = w.clone();
            proj.project(&mut x);
            let oracle = dense_projection(&sys.rows, &sys.rhs, &w);
            worst = x.iter().zip(&oracle).fold(worst, |m, (a, b)| m.max((a - b).abs()));
        }
    }
    worst
}

/// Size of the sibling group of each row: rows sharing its parent variable.
pub fn sibling_groups(rows: &[FlowRow]) -> Vec<usize> {
    let mut count: HashMap<Option<u32>, usize> = HashMap::new();
    for r in rows {
        *count.entry(r.parent).or_insert(0) += 1;
    }
    rows.iter().map(|r| count[&r.parent]).collect()
}
