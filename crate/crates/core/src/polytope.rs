//! Correlation plans over relevant sequence pairs and their consistency
//! constraints.
//!
//! A pair `(σ₁, σ₂)` is relevant when either sequence is empty or the
//! information sets of the two last actions are connected, i.e. some root to
//! leaf path visits a node of each. Pairs are numbered row-major: by `σ₁`, then
//! by `σ₂`.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameTree, Node, Player, SeqId, EMPTY_SEQ};

#[derive(Clone, Debug)]
pub struct RelevantPairs {
    n_seq: [usize; 2],
    row_ptr: Vec<usize>,
    /// `σ₂` of each pair; pairs are numbered by position here.
    pair_s2: Vec<u32>,
    pair_s1: Vec<u32>,
    col_ptr: Vec<usize>,
    /// Pair indices of each column, ordered by `σ₁`.
    col_pairs: Vec<u32>,
    /// Connected opponent local infosets, per local infoset of each player (sorted).
    connected: [Vec<Vec<u32>>; 2],
}

impl RelevantPairs {
    pub fn build(game: &GameTree) -> RelevantPairs {
        let f1 = game.form(Player::One);
        let f2 = game.form(Player::Two);
        let mut conn: [Vec<BTreeSet<u32>>; 2] =
            [vec![BTreeSet::new(); f1.n_infosets()], vec![BTreeSet::new(); f2.n_infosets()]];

        // Walk the tree keeping the infosets on the current root path per player.
        let mut path: [Vec<u32>; 2] = [vec![], vec![]];
        let mut stack: Vec<(usize, bool)> = vec![(game.root(), false)];
        while let Some((v, leaving)) = stack.pop() {
            let Node::Decision { player, infoset, children } = game.node(v) else { continue };
            let p = player.index();
            let k = game.form(*player).local(*infoset).expect("known infoset") as u32;
            if leaving {
                path[p].pop();
                continue;
            }
            for &j in &path[1 - p] {
                conn[p][k as usize].insert(j);
                conn[1 - p][j as usize].insert(k);
            }
            path[p].push(k);
            stack.push((v, true));
            stack.extend(children.iter().rev().map(|&c| (c, false)));
        }
        let connected = conn.map(|c| c.into_iter().map(|s| s.into_iter().collect::<Vec<u32>>()).collect::<Vec<_>>());

        let n_seq = [f1.n_sequences(), f2.n_sequences()];
        let mut row_ptr = vec![0];
        let mut pair_s1 = vec![];
        let mut pair_s2 = vec![];
        for s1 in 0..n_seq[0] {
            match f1.seq_infoset[s1] {
                None => pair_s2.extend(0..n_seq[1] as u32),
                Some(k) => {
                    pair_s2.push(EMPTY_SEQ as u32);
                    for &j in &connected[0][k] {
                        let j = j as usize;
                        let first = f2.first_seq[j];
                        pair_s2.extend((first..first + f2.n_actions[j]).map(|s| s as u32));
                    }
                    // Infosets are listed in local order, so sequences come out sorted.
                }
            }
            pair_s1.resize(pair_s2.len(), s1 as u32);
            row_ptr.push(pair_s2.len());
        }

        let mut col_count = vec![0usize; n_seq[1] + 1];
        for &s2 in &pair_s2 {
            col_count[s2 as usize + 1] += 1;
        }
        let mut col_ptr = col_count;
        for i in 0..n_seq[1] {
            col_ptr[i + 1] += col_ptr[i];
        }
        let mut fill = col_ptr.clone();
        let mut col_pairs = vec![0u32; pair_s2.len()];
        for (k, &s2) in pair_s2.iter().enumerate() {
            col_pairs[fill[s2 as usize]] = k as u32;
            fill[s2 as usize] += 1;
        }
        RelevantPairs { n_seq, row_ptr, pair_s2, pair_s1, col_ptr, col_pairs, connected }
    }

    pub fn len(&self) -> usize {
        self.pair_s2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pair_s2.is_empty()
    }

    pub fn n_sequences(&self) -> [usize; 2] {
        self.n_seq
    }

    pub fn pair(&self, k: usize) -> (SeqId, SeqId) {
        (self.pair_s1[k] as SeqId, self.pair_s2[k] as SeqId)
    }

    pub fn index(&self, s1: SeqId, s2: SeqId) -> Option<usize> {
        if s1 >= self.n_seq[0] {
            return None;
        }
        let (lo, hi) = (self.row_ptr[s1], self.row_ptr[s1 + 1]);
        self.pair_s2[lo..hi].binary_search(&(s2 as u32)).ok().map(|i| lo + i)
    }

    /// Pair index for a player-ordered pair: `own` belongs to `p`, `other` to the opponent.
    pub fn index_for(&self, p: Player, own: SeqId, other: SeqId) -> Option<usize> {
        match p {
            Player::One => self.index(own, other),
            Player::Two => self.index(other, own),
        }
    }

    /// Pair indices with first component `s1`, ascending in `σ₂`.
    pub fn row(&self, s1: SeqId) -> std::ops::Range<usize> {
        self.row_ptr[s1]..self.row_ptr[s1 + 1]
    }

    /// Pair indices with second component `s2`, ascending in `σ₁`.
    pub fn column(&self, s2: SeqId) -> &[u32] {
        &self.col_pairs[self.col_ptr[s2]..self.col_ptr[s2 + 1]]
    }

    /// Whether local infoset `k` of player `p` is connected to local infoset `j` of the opponent.
    pub fn infosets_connected(&self, p: Player, k: usize, j: usize) -> bool {
        self.connected[p.index()][k].binary_search(&(j as u32)).is_ok()
    }

    pub fn connected_infosets(&self, p: Player, k: usize) -> &[u32] {
        &self.connected[p.index()][k]
    }
}

/// One affine flow row `Σ children − parent = rhs` over a system's local variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FlowRow {
    /// Local variable index of the parent sequence; `None` for the normalization row.
    pub parent: Option<u32>,
    pub children: Vec<u32>,
    /// Owning player's local infoset, `None` for normalization.
    pub infoset: Option<u32>,
}

/// The consistency constraints of one column (`σ₂` fixed, over player 1
/// sequences) or one row (`σ₁` fixed, over player 2 sequences).
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub player: Player,
    /// The fixed opponent sequence.
    pub fixed: SeqId,
    /// Global pair indices of the local variables.
    pub vars: Vec<u32>,
    /// Local own-sequence id of each variable.
    pub var_seq: Vec<u32>,
    pub rows: Vec<FlowRow>,
    pub rhs: Vec<f64>,
}

impl ConstraintSystem {
    /// Largest `|Fx − f|` over the rows.
    pub fn residual(&self, xi: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, &f)| {
                let mut s: f64 = r.children.iter().map(|&c| xi[self.vars[c as usize] as usize]).sum();
                if let Some(p) = r.parent {
                    s -= xi[self.vars[p as usize] as usize];
                }
                (s - f).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// X₁ (per-column systems) and X₂ (per-row systems).
#[derive(Clone, Debug)]
pub struct ConsistencySystem {
    /// Indexed by `σ₂`.
    pub x1: Vec<ConstraintSystem>,
    /// Indexed by `σ₁`.
    pub x2: Vec<ConstraintSystem>,
}

impl ConsistencySystem {
    pub fn build(game: &GameTree, pairs: &RelevantPairs) -> ConsistencySystem {
        let x1 = (0..pairs.n_sequences()[1])
            .map(|s2| {
                let vars: Vec<u32> = pairs.column(s2).to_vec();
                let seqs: Vec<u32> = vars.iter().map(|&k| pairs.pair(k as usize).0 as u32).collect();
                system(game, pairs, Player::One, s2, vars, seqs)
            })
            .collect();
        let x2 = (0..pairs.n_sequences()[0])
            .map(|s1| {
                let vars: Vec<u32> = pairs.row(s1).map(|k| k as u32).collect();
                let seqs: Vec<u32> = vars.iter().map(|&k| pairs.pair(k as usize).1 as u32).collect();
                system(game, pairs, Player::Two, s1, vars, seqs)
            })
            .collect();
        ConsistencySystem { x1, x2 }
    }

    pub fn residual_x1(&self, xi: &[f64]) -> f64 {
        self.x1.iter().map(|s| s.residual(xi)).fold(0.0, f64::max)
    }

    pub fn residual_x2(&self, xi: &[f64]) -> f64 {
        self.x2.iter().map(|s| s.residual(xi)).fold(0.0, f64::max)
    }

    pub fn residual(&self, xi: &[f64]) -> f64 {
        self.residual_x1(xi).max(self.residual_x2(xi))
    }

    pub fn systems(&self) -> impl Iterator<Item = &ConstraintSystem> {
        self.x1.iter().chain(self.x2.iter())
    }
}

fn system(
    game: &GameTree,
    pairs: &RelevantPairs,
    p: Player,
    fixed: SeqId,
    vars: Vec<u32>,
    var_seq: Vec<u32>,
) -> ConstraintSystem {
    let form = game.form(p);
    let other = game.form(p.opponent());
    let local = |s: SeqId| var_seq.binary_search(&(s as u32)).ok().map(|i| i as u32);
    let mut rows = vec![];
    let mut rhs = vec![];
    if fixed == EMPTY_SEQ {
        rows.push(FlowRow { parent: None, children: vec![local(EMPTY_SEQ).expect("empty pair")], infoset: None });
        rhs.push(1.0);
    }
    let fixed_infoset = other.seq_infoset[fixed];
    for k in 0..form.n_infosets() {
        let relevant = match fixed_infoset {
            None => true,
            Some(j) => pairs.infosets_connected(p, k, j),
        };
        if !relevant {
            continue;
        }
        let children =
            (0..form.n_actions[k]).map(|a| local(form.first_seq[k] + a).expect("relevant child pair")).collect();
        rows.push(FlowRow {
            parent: Some(local(form.parent_seq[k]).expect("relevant parent pair")),
            children,
            infoset: Some(k as u32),
        });
        rhs.push(0.0);
    }
    ConstraintSystem { player: p, fixed, vars, var_seq, rows, rhs }
}

/// A vector over relevant pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPlan {
    pub values: Vec<f64>,
}

impl CorrelationPlan {
    pub fn zeros(n: usize) -> Self {
        CorrelationPlan { values: vec![0.0; n] }
    }

    /// Plan of the independent product of two behavioral strategies given by
    /// their realization weights.
    pub fn product(pairs: &RelevantPairs, r1: &[f64], r2: &[f64]) -> Self {
        CorrelationPlan {
            values: (0..pairs.len())
                .map(|k| {
                    let (a, b) = pairs.pair(k);
                    r1[a] * r2[b]
                })
                .collect(),
        }
    }

    /// Product of the uniform behavioral strategies of both players.
    pub fn uniform(game: &GameTree, pairs: &RelevantPairs) -> Self {
        Self::product(
            pairs,
            &game.form(Player::One).uniform_realization(),
            &game.form(Player::Two).uniform_realization(),
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::min)
    }
}

/// Terminal payoff pairs mapped to pair indices.
#[derive(Clone, Debug)]
pub struct TerminalPairs {
    pub pair: Vec<u32>,
    pub payoffs: Vec<[f64; 2]>,
}

impl TerminalPairs {
    pub fn build(game: &GameTree, pairs: &RelevantPairs) -> Self {
        let n = game.terminals().len();
        let pair = (0..n)
            .map(|t| {
                pairs
                    .index(game.terminal_seq(t, Player::One), game.terminal_seq(t, Player::Two))
                    .expect("terminal pair is relevant") as u32
            })
            .collect();
        TerminalPairs { pair, payoffs: (0..n).map(|t| game.payoffs(t)).collect() }
    }

    /// `Σ_z (u₁(z)+u₂(z)) ξ[σ₁(z), σ₂(z)]`.
    pub fn social_welfare(&self, xi: &[f64]) -> f64 {
        self.pair.iter().zip(&self.payoffs).map(|(&k, u)| (u[0] + u[1]) * xi[k as usize]).sum()
    }

    pub fn expected_payoffs(&self, xi: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (&k, u) in self.pair.iter().zip(&self.payoffs) {
            out[0] += u[0] * xi[k as usize];
            out[1] += u[1] * xi[k as usize];
        }
        out
    }

    /// Probability of each terminal under full compliance.
    pub fn distribution(&self, xi: &[f64]) -> Vec<f64> {
        self.pair.iter().map(|&k| xi[k as usize]).collect()
    }
}

/// Game-level precomputation shared by the oracle, projection, incentive and LP code.
#[derive(Debug)]
pub struct Polytope<'g> {
    pub game: &'g GameTree,
    pub pairs: RelevantPairs,
    pub consistency: ConsistencySystem,
    pub terminals: TerminalPairs,
}

impl<'g> Polytope<'g> {
    pub fn new(game: &'g GameTree) -> Self {
        let pairs = RelevantPairs::build(game);
        let consistency = ConsistencySystem::build(game, &pairs);
        let terminals = TerminalPairs::build(game, &pairs);
        Polytope { game, pairs, consistency, terminals }
    }

    pub fn social_welfare(&self, xi: &CorrelationPlan) -> f64 {
        self.terminals.social_welfare(&xi.values)
    }

    /// Terminal distribution of a plan that is feasible within `tolerance`.
    pub fn outcome_distribution(&self, xi: &CorrelationPlan, tolerance: f64) -> Result<Vec<f64>> {
        let residual = self.consistency.residual(&xi.values).max(-xi.min_entry());
        if residual > tolerance {
            return Err(Error::InfeasiblePlan { residual, tolerance });
        }
        Ok(self.terminals.distribution(&xi.values))
    }

    /// Writes `seq1_infoset, seq1_action, seq2_infoset, seq2_action, value`
    /// rows, one per relevant pair. Empty sequences have blank fields.
    pub fn write_plan_csv(&self, xi: &CorrelationPlan, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["seq1_infoset", "seq1_action", "seq2_infoset", "seq2_action", "value"])?;
        for k in 0..self.pairs.len() {
            let (s1, s2) = self.pairs.pair(k);
            let a = self.game.seq_label(Player::One, s1);
            let b = self.game.seq_label(Player::Two, s2);
            let field = |x: Option<(usize, &str)>| match x {
                None => (String::new(), String::new()),
                Some((i, l)) => (i.to_string(), l.to_string()),
            };
            let (i1, a1) = field(a);
            let (i2, a2) = field(b);
            out.write_record([i1, a1, i2, a2, format!("{}", xi.values[k])])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a plan written by [`Polytope::write_plan_csv`]. Pairs absent from the
    /// file are zero; unknown pairs are an error. Lines starting with `#` are skipped.
    pub fn read_plan_csv(&self, r: impl Read) -> Result<CorrelationPlan> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let mut plan = CorrelationPlan::zeros(self.pairs.len());
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != 5 {
                return Err(Error::IndexMismatch(format!("expected 5 fields, got {}", rec.len())));
            }
            let s1 = self.lookup_seq(Player::One, &rec[0], &rec[1])?;
            let s2 = self.lookup_seq(Player::Two, &rec[2], &rec[3])?;
            let k = self
                .pairs
                .index(s1, s2)
                .ok_or_else(|| Error::IndexMismatch(format!("pair ({s1}, {s2}) is not relevant")))?;
            plan.values[k] =
                rec[4].trim().parse().map_err(|_| Error::IndexMismatch(format!("bad value `{}`", &rec[4])))?;
        }
        Ok(plan)
    }

    fn lookup_seq(&self, p: Player, infoset: &str, action: &str) -> Result<SeqId> {
        if infoset.trim().is_empty() {
            return Ok(EMPTY_SEQ);
        }
        let i: usize =
            infoset.trim().parse().map_err(|_| Error::IndexMismatch(format!("bad infoset id `{infoset}`")))?;
        let info = self
            .game
            .infosets()
            .get(i)
            .filter(|x| x.owner == p)
            .ok_or_else(|| Error::IndexMismatch(format!("infoset {i} is not an infoset of {p}")))?;
        let a = info
            .actions
            .iter()
            .position(|x| x == action)
            .ok_or_else(|| Error::IndexMismatch(format!("infoset {i} has no action `{action}`")))?;
        Ok(self.game.form(p).seq_of(i, a).expect("known infoset"))
    }
}
