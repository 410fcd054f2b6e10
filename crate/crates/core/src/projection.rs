//! Euclidean projections onto the consistency systems and the orthant.
//!
//! Each system `Fx = f` is projected with `x* = w + Fᵀλ`, `(FFᵀ)λ = f − Fw`.
//! `FFᵀ` is factored once per distinct row structure, eliminating infoset
//! rows children first so that no fill-in occurs.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polytope::{ConsistencySystem, ConstraintSystem, FlowRow};

const PIVOT_TOL: f64 = 1e-12;

/// Sparse symmetric matrix stored as lower-triangle columns.
pub type SparseLower = Vec<BTreeMap<usize, f64>>;

/// Lower triangle of `FFᵀ` for flow rows over `n_vars` variables.
pub fn gram(rows: &[FlowRow], n_vars: usize) -> SparseLower {
    let mut touch: Vec<Vec<(usize, f64)>> = vec![vec![]; n_vars];
    for (i, r) in rows.iter().enumerate() {
        if let Some(p) = r.parent {
            touch[p as usize].push((i, -1.0));
        }
        for &c in &r.children {
            touch[c as usize].push((i, 1.0));
        }
    }
    let mut g: SparseLower = vec![BTreeMap::new(); rows.len()];
    for entries in &touch {
        for &(i, a) in entries {
            for &(j, b) in entries {
                if j >= i {
                    *g[i].entry(j).or_insert(0.0) += a * b;
                }
            }
        }
    }
    for col in &mut g {
        col.retain(|_, v| *v != 0.0);
    }
    g
}

/// `L Lᵀ = P A Pᵀ` for a permutation `P`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    /// `perm[k]` is the original row eliminated at step `k`.
    pub perm: Vec<usize>,
    /// Columns of `L` in elimination order; keys are elimination positions.
    pub cols: Vec<BTreeMap<usize, f64>>,
    /// Entries created during elimination that were zero in `A`.
    pub fill: usize,
    /// Multiply-add updates per elimination step.
    pub ops: Vec<usize>,
}

impl Cholesky {
    /// Right-looking elimination of the lower-triangle matrix `a` in order `perm`.
    pub fn factor(a: &SparseLower, perm: Vec<usize>) -> Result<Cholesky> {
        let n = a.len();
        let mut pos = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            pos[i] = k;
        }
        let mut work: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (i, col) in a.iter().enumerate() {
            for (&j, &v) in col {
                let (r, c) = (pos[i].max(pos[j]), pos[i].min(pos[j]));
                work[c].insert(r, v);
            }
        }
        let mut fill = 0;
        let mut ops = Vec::with_capacity(n);
        for k in 0..n {
            let mut col = std::mem::take(&mut work[k]);
            let d = col.get(&k).copied().unwrap_or(0.0);
            if d <= PIVOT_TOL {
                return Err(Error::SingularSystem { step: k, pivot: d });
            }
            let d = d.sqrt();
            for v in col.values_mut() {
                *v /= d;
            }
            col.insert(k, d);
            let below: Vec<(usize, f64)> = col.range(k + 1..).map(|(&r, &v)| (r, v)).collect();
            let mut count = 0;
            for (x, &(c, vc)) in below.iter().enumerate() {
                for &(r, vr) in &below[x..] {
                    count += 1;
                    match work[c].get_mut(&r) {
                        Some(e) => *e -= vr * vc,
                        None => {
                            fill += 1;
                            work[c].insert(r, -vr * vc);
                        }
                    }
                }
            }
            ops.push(count);
            work[k] = col;
        }
        Ok(Cholesky { perm, cols: work, fill, ops })
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(BTreeMap::len).sum()
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves `A x = b` in original row order.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut z: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for k in 0..n {
            let col = &self.cols[k];
            z[k] /= col[&k];
            let zk = z[k];
            for (&r, &v) in col.range(k + 1..) {
                z[r] -= v * zk;
            }
        }
        for k in (0..n).rev() {
            let col = &self.cols[k];
            let mut s = z[k];
            for (&r, &v) in col.range(k + 1..) {
                s -= v * z[r];
            }
            z[k] = s / col[&k];
        }
        let mut x = vec![0.0; n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = z[k];
        }
        x
    }

    /// Dense `L` in elimination order (for tests and diagnostics).
    pub fn dense_l(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut l = vec![vec![0.0; n]; n];
        for (c, col) in self.cols.iter().enumerate() {
            for (&r, &v) in col {
                l[r][c] = v;
            }
        }
        l
    }
}

/// Row structure of a system, used to share factors.
type StructureKey = Vec<(Option<u32>, Vec<u32>)>;

/// Factored projector for one `Fx = f` system.
#[derive(Clone, Debug)]
pub struct AffineProjector {
    pub rows: Vec<FlowRow>,
    pub rhs: Vec<f64>,
    pub n_vars: usize,
    pub chol: Arc<Cholesky>,
}

impl AffineProjector {
    pub fn new(sys: &ConstraintSystem) -> Result<Self> {
        let chol = Arc::new(factorize(&sys.rows, sys.vars.len())?);
        Ok(Self::with_factor(sys, chol))
    }

    fn with_factor(sys: &ConstraintSystem, chol: Arc<Cholesky>) -> Self {
        AffineProjector { rows: sys.rows.clone(), rhs: sys.rhs.clone(), n_vars: sys.vars.len(), chol }
    }

    /// `f − Fw`.
    pub fn defect(&self, w: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, &f)| {
                let mut s: f64 = r.children.iter().map(|&c| w[c as usize]).sum();
                if let Some(p) = r.parent {
                    s -= w[p as usize];
                }
                f - s
            })
            .collect()
    }

    /// Projects `w` in place onto `{x : Fx = f}`.
    pub fn project(&self, w: &mut [f64]) {
        if self.rows.is_empty() {
            return;
        }
        let lambda = self.chol.solve(&self.defect(w));
        for (r, &l) in self.rows.iter().zip(&lambda) {
            if let Some(p) = r.parent {
                w[p as usize] -= l;
            }
            for &c in &r.children {
                w[c as usize] += l;
            }
        }
    }
}

/// Child-before-parent elimination order: rows in reverse topological order.
pub fn elimination_order(rows: &[FlowRow]) -> Vec<usize> {
    (0..rows.len()).rev().collect()
}

pub fn factorize(rows: &[FlowRow], n_vars: usize) -> Result<Cholesky> {
    Cholesky::factor(&gram(rows, n_vars), elimination_order(rows))
}

/// Projectors for every column and row system.
#[derive(Clone, Debug)]
pub struct Projectors {
    pub x1: Vec<AffineProjector>,
    pub x2: Vec<AffineProjector>,
    /// Number of distinct factorizations computed.
    pub distinct_factors: usize,
}

impl Projectors {
    pub fn build(cons: &ConsistencySystem) -> Result<Self> {
        let mut cache: HashMap<StructureKey, Arc<Cholesky>> = HashMap::new();
        let systems: Vec<&ConstraintSystem> = cons.systems().collect();
        let keys: Vec<StructureKey> =
            systems.iter().map(|s| s.rows.iter().map(|r| (r.parent, r.children.clone())).collect()).collect();
        let mut first: HashMap<&StructureKey, usize> = HashMap::new();
        for (i, k) in keys.iter().enumerate() {
            first.entry(k).or_insert(i);
        }
        let mut unique: Vec<(StructureKey, usize)> = first.into_iter().map(|(k, i)| (k.clone(), i)).collect();
        unique.sort_by_key(|&(_, i)| i);
        let factors: Vec<Result<Cholesky>> =
            unique.par_iter().map(|(_, i)| factorize(&systems[*i].rows, systems[*i].vars.len())).collect();
        for ((k, _), f) in unique.into_iter().zip(factors) {
            cache.insert(k, Arc::new(f?));
        }
        let mut all = systems.iter().zip(&keys).map(|(s, k)| AffineProjector::with_factor(s, cache[k].clone()));
        let x1 = all.by_ref().take(cons.x1.len()).collect();
        let x2 = all.collect();
        Ok(Projectors { x1, x2, distinct_factors: cache.len() })
    }
}

fn project_family(systems: &[ConstraintSystem], projectors: &[AffineProjector], xi: &mut [f64]) {
    let updates: Vec<Vec<f64>> = systems
        .par_iter()
        .zip(projectors)
        .map(|(sys, proj)| {
            let mut w: Vec<f64> = sys.vars.iter().map(|&k| xi[k as usize]).collect();
            proj.project(&mut w);
            w
        })
        .collect();
    for (sys, w) in systems.iter().zip(updates) {
        for (&k, v) in sys.vars.iter().zip(w) {
            xi[k as usize] = v;
        }
    }
}

/// Projects every column onto its player-1 consistency system.
pub fn project_x1(cons: &ConsistencySystem, proj: &Projectors, xi: &mut [f64]) {
    project_family(&cons.x1, &proj.x1, xi);
}

/// Projects every row onto its player-2 consistency system.
pub fn project_x2(cons: &ConsistencySystem, proj: &Projectors, xi: &mut [f64]) {
    project_family(&cons.x2, &proj.x2, xi);
}

/// Clamps negative entries to zero and re-pins the empty pair (index 0) to one.
pub fn project_orthant(xi: &mut [f64]) {
    for v in xi.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    if let Some(v) = xi.first_mut() {
        *v = 1.0;
    }
}
