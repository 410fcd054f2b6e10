//! Two-player, chance-free, perfect-recall extensive-form games.
//!
//! A [`GameTree`] is built from a [`GameDoc`] (the JSON interchange form) after
//! [`validate`] finds no problems. Once built it is immutable and carries the
//! derived sequence-form structure of both players: sequences are numbered per
//! player with the empty sequence at index 0, followed by one block of
//! `(infoset, action)` pairs per information set, laid out in depth-first
//! order of the infoset forest. Every infoset's descendants therefore occupy a
//! contiguous range of infoset indices and of sequence ids, which the incentive
//! and projection code rely on.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type InfosetId = usize;
/// Per-player sequence id; 0 is the empty sequence.
pub type SeqId = usize;

pub const EMPTY_SEQ: SeqId = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "P1")]
    One,
    #[serde(rename = "P2")]
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn from_index(i: usize) -> Player {
        if i == 0 {
            Player::One
        } else {
            Player::Two
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::One => write!(f, "P1"),
            Player::Two => write!(f, "P2"),
        }
    }
}

// ---------------------------------------------------------------------------
// Interchange document
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Decision,
    Terminal,
    /// Parsed only so that validation can reject it by name.
    Chance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: NodeId,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<Player>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infoset: Option<InfosetId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<IndexMap<String, NodeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfosetDoc {
    pub id: InfosetId,
    pub owner: Player,
    pub nodes: Vec<NodeId>,
    pub actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// JSON form of a game. Field names are part of the file contract.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameDoc {
    pub players: Vec<String>,
    pub nodes: Vec<NodeDoc>,
    pub infosets: Vec<InfosetDoc>,
}

impl GameDoc {
    pub fn from_reader(r: impl Read) -> Result<GameDoc> {
        Ok(serde_json::from_reader(r)?)
    }

    pub fn write_json(&self, mut w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("expected 2 players, found {0}")]
    PlayerCount(usize),
    #[error("game has no nodes")]
    Empty,
    #[error("node ids are not dense: id {id} at position {position}")]
    NodeIdsNotDense { position: usize, id: NodeId },
    #[error("infoset ids are not dense: id {id} at position {position}")]
    InfosetIdsNotDense { position: usize, id: InfosetId },
    #[error("node {node} is a chance node; chance is not supported")]
    ChanceNode { node: NodeId },
    #[error("node {node} is missing field `{field}`")]
    MissingField { node: NodeId, field: &'static str },
    #[error("node {node} has non-finite payoffs")]
    NonFinitePayoff { node: NodeId },
    #[error("node {node} has no actions")]
    EmptyActions { node: NodeId },
    #[error("node {node} references unknown child {child}")]
    UnknownChild { node: NodeId, child: NodeId },
    #[error("node {node} has more than one parent")]
    MultipleParents { node: NodeId },
    #[error("no root node (every node has a parent)")]
    NoRoot,
    #[error("multiple root candidates: {0:?}")]
    MultipleRoots(Vec<NodeId>),
    #[error("node {node} is an orphan (unreachable from the root)")]
    Orphan { node: NodeId },
    #[error("node {node} references unknown infoset {infoset}")]
    UnknownInfoset { node: NodeId, infoset: InfosetId },
    #[error("node {node} is owned by {node_owner} but infoset {infoset} is owned by {infoset_owner}")]
    OwnerMismatch { node: NodeId, infoset: InfosetId, node_owner: Player, infoset_owner: Player },
    #[error("node {node} action set differs from infoset {infoset}")]
    InconsistentActions { infoset: InfosetId, node: NodeId },
    #[error("infoset {infoset} has duplicate action labels")]
    DuplicateActions { infoset: InfosetId },
    #[error("infoset {infoset} membership disagrees with node {node}")]
    MembershipMismatch { infoset: InfosetId, node: NodeId },
    #[error("infoset {infoset} has no member nodes")]
    EmptyInfoset { infoset: InfosetId },
    #[error("perfect recall violated at infoset {infoset}: nodes {first} and {second} have different histories")]
    PerfectRecall { infoset: InfosetId, first: NodeId, second: NodeId },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<ValidationError>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.errors.is_empty() {
            return write!(f, "valid");
        }
        for e in &self.errors {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of a game document and reports all
/// violations found. An empty report means [`GameTree::from_doc`] will succeed.
pub fn validate(doc: &GameDoc) -> ValidationReport {
    use ValidationError as E;
    let mut errors = Vec::new();

    if doc.players.len() != 2 {
        errors.push(E::PlayerCount(doc.players.len()));
    }
    if doc.nodes.is_empty() {
        errors.push(E::Empty);
        return ValidationReport { errors };
    }
    let mut dense = true;
    for (pos, n) in doc.nodes.iter().enumerate() {
        if n.id != pos {
            errors.push(E::NodeIdsNotDense { position: pos, id: n.id });
            dense = false;
        }
    }
    for (pos, i) in doc.infosets.iter().enumerate() {
        if i.id != pos {
            errors.push(E::InfosetIdsNotDense { position: pos, id: i.id });
            dense = false;
        }
    }
    if !dense {
        return ValidationReport { errors };
    }

    let n_nodes = doc.nodes.len();
    let mut parent: Vec<Option<(NodeId, usize)>> = vec![None; n_nodes];
    for n in &doc.nodes {
        match n.kind {
            NodeKind::Chance => errors.push(E::ChanceNode { node: n.id }),
            NodeKind::Terminal => match n.payoffs {
                None => errors.push(E::MissingField { node: n.id, field: "payoffs" }),
                Some(p) if !p.iter().all(|x| x.is_finite()) => errors.push(E::NonFinitePayoff { node: n.id }),
                _ => {}
            },
            NodeKind::Decision => {
                if n.owner.is_none() {
                    errors.push(E::MissingField { node: n.id, field: "owner" });
                }
                let Some(children) = &n.children else {
                    errors.push(E::MissingField { node: n.id, field: "children" });
                    continue;
                };
                if children.is_empty() {
                    errors.push(E::EmptyActions { node: n.id });
                }
                for (a, &c) in children.values().enumerate() {
                    if c >= n_nodes {
                        errors.push(E::UnknownChild { node: n.id, child: c });
                    } else if parent[c].is_some() || c == n.id {
                        errors.push(E::MultipleParents { node: c });
                    } else {
                        parent[c] = Some((n.id, a));
                    }
                }
                match n.infoset {
                    None => errors.push(E::MissingField { node: n.id, field: "infoset" }),
                    Some(i) if i >= doc.infosets.len() => errors.push(E::UnknownInfoset { node: n.id, infoset: i }),
                    Some(i) => {
                        let info = &doc.infosets[i];
                        if let Some(owner) = n.owner {
                            if owner != info.owner {
                                errors.push(E::OwnerMismatch {
                                    node: n.id,
                                    infoset: i,
                                    node_owner: owner,
                                    infoset_owner: info.owner,
                                });
                            }
                        }
                        let same = children.len() == info.actions.len()
                            && children.keys().zip(&info.actions).all(|(a, b)| a == b);
                        let same_set = children.len() == info.actions.len()
                            && info.actions.iter().all(|a| children.contains_key(a));
                        if !same && !same_set {
                            errors.push(E::InconsistentActions { infoset: i, node: n.id });
                        }
                        if !info.nodes.contains(&n.id) {
                            errors.push(E::MembershipMismatch { infoset: i, node: n.id });
                        }
                    }
                }
            }
        }
    }
    for info in &doc.infosets {
        if info.nodes.is_empty() {
            errors.push(E::EmptyInfoset { infoset: info.id });
        }
        let mut labels: Vec<&String> = info.actions.iter().collect();
        labels.sort();
        labels.dedup();
        if labels.len() != info.actions.len() {
            errors.push(E::DuplicateActions { infoset: info.id });
        }
        for &v in &info.nodes {
            let ok = v < n_nodes && doc.nodes[v].kind == NodeKind::Decision && doc.nodes[v].infoset == Some(info.id);
            if !ok {
                errors.push(E::MembershipMismatch { infoset: info.id, node: v });
            }
        }
    }

    let roots: Vec<NodeId> = (0..n_nodes).filter(|&v| parent[v].is_none()).collect();
    let root = match roots.len() {
        0 => {
            errors.push(E::NoRoot);
            None
        }
        1 => Some(roots[0]),
        _ => {
            // Nodes caught in a parent cycle also show up here, so report the
            // extra candidates as orphans when one of them reaches the rest.
            errors.push(E::MultipleRoots(roots.clone()));
            None
        }
    };
    if !errors.is_empty() {
        return ValidationReport { errors };
    }
    let root = root.expect("single root");

    // Reachability and per-node history of the acting player's last sequence.
    let mut seen = vec![false; n_nodes];
    let mut last_own: Vec<[Option<(InfosetId, usize)>; 2]> = vec![[None, None]; n_nodes];
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        seen[v] = true;
        let n = &doc.nodes[v];
        if let (NodeKind::Decision, Some(children), Some(owner), Some(i)) = (n.kind, &n.children, n.owner, n.infoset) {
            for (label, &c) in children {
                let mut h = last_own[v];
                let act = doc.infosets[i].actions.iter().position(|x| x == label).expect("validated action set");
                h[owner.index()] = Some((i, act));
                last_own[c] = h;
                stack.push(c);
            }
        }
    }
    for v in 0..n_nodes {
        if !seen[v] {
            errors.push(E::Orphan { node: v });
        }
    }
    for info in &doc.infosets {
        let p = info.owner.index();
        let mut it = info.nodes.iter().filter(|&&v| v < n_nodes && seen[v]);
        if let Some(&first) = it.next() {
            for &other in it {
                if last_own[other][p] != last_own[first][p] {
                    errors.push(E::PerfectRecall { infoset: info.id, first, second: other });
                    break;
                }
            }
        }
    }
    ValidationReport { errors }
}

// ---------------------------------------------------------------------------
// Validated game
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Decision { player: Player, infoset: InfosetId, children: Vec<NodeId> },
    Terminal { payoffs: [f64; 2] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Infoset {
    pub id: InfosetId,
    pub owner: Player,
    pub actions: Vec<String>,
    pub nodes: Vec<NodeId>,
    pub label: Option<String>,
}

/// A sequence of one player: empty, or an `(infoset, action index)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sequence {
    pub owner: Player,
    pub last: Option<(InfosetId, usize)>,
}

impl Sequence {
    pub fn is_empty(&self) -> bool {
        self.last.is_none()
    }
}

/// Sequence-form structure of one player's information sets.
///
/// Infosets are addressed by a local index in depth-first forest order. The
/// subtree of local infoset `k` is `k..subtree_end[k]` and its sequences are
/// `first_seq[k]..subtree_seq_end[k]`.
#[derive(Clone, Debug)]
pub struct SequenceForm {
    pub player: Player,
    /// Global infoset id per local index.
    pub infosets: Vec<InfosetId>,
    pub n_actions: Vec<usize>,
    pub first_seq: Vec<SeqId>,
    pub parent_seq: Vec<SeqId>,
    pub subtree_end: Vec<usize>,
    pub subtree_seq_end: Vec<SeqId>,
    /// Local infoset of each sequence (`None` for the empty sequence).
    pub seq_infoset: Vec<Option<usize>>,
    pub seq_action: Vec<usize>,
    /// Child local infosets of each sequence.
    pub children: Vec<Vec<usize>>,
    local_of: HashMap<InfosetId, usize>,
}

impl SequenceForm {
    pub fn n_sequences(&self) -> usize {
        self.seq_infoset.len()
    }

    pub fn n_infosets(&self) -> usize {
        self.infosets.len()
    }

    pub fn local(&self, infoset: InfosetId) -> Option<usize> {
        self.local_of.get(&infoset).copied()
    }

    pub fn seq_of(&self, infoset: InfosetId, action: usize) -> Option<SeqId> {
        let k = self.local(infoset)?;
        (action < self.n_actions[k]).then(|| self.first_seq[k] + action)
    }

    pub fn parent_of_seq(&self, s: SeqId) -> Option<SeqId> {
        self.seq_infoset[s].map(|k| self.parent_seq[k])
    }

    /// True when `anc` equals `s` or lies on the chain of parent sequences of `s`.
    pub fn is_prefix(&self, anc: SeqId, mut s: SeqId) -> bool {
        loop {
            if s == anc {
                return true;
            }
            match self.parent_of_seq(s) {
                Some(p) => s = p,
                None => return false,
            }
        }
    }

    /// Realization weights of the uniform behavioral strategy.
    pub fn uniform_realization(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.n_sequences()];
        r[EMPTY_SEQ] = 1.0;
        for k in 0..self.n_infosets() {
            let w = r[self.parent_seq[k]] / self.n_actions[k] as f64;
            for a in 0..self.n_actions[k] {
                r[self.first_seq[k] + a] = w;
            }
        }
        r
    }
}

/// Terminal-id sets for a trigger sequence `(Î, â)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminalPartition {
    pub player: Player,
    pub trigger: SeqId,
    /// Terminals reached through `â` at `Î`.
    pub trig: Vec<usize>,
    /// Terminals below `Î` reached through any other action.
    pub info: Vec<usize>,
    /// Everything else.
    pub outside: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct GameTree {
    players: Vec<String>,
    nodes: Vec<Node>,
    root: NodeId,
    parent: Vec<Option<(NodeId, usize)>>,
    infosets: Vec<Infoset>,
    forms: [SequenceForm; 2],
    /// Last sequence of each player strictly before the node.
    node_seq: Vec<[SeqId; 2]>,
    terminals: Vec<NodeId>,
}

impl GameTree {
    pub fn from_doc(doc: &GameDoc) -> Result<GameTree> {
        let report = validate(doc);
        if !report.is_valid() {
            return Err(Error::Validation(report));
        }
        let infosets: Vec<Infoset> = doc
            .infosets
            .iter()
            .map(|i| Infoset {
                id: i.id,
                owner: i.owner,
                actions: i.actions.clone(),
                nodes: i.nodes.clone(),
                label: i.label.clone(),
            })
            .collect();
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        let mut parent = vec![None; doc.nodes.len()];
        for n in &doc.nodes {
            nodes.push(match n.kind {
                NodeKind::Terminal => Node::Terminal { payoffs: n.payoffs.expect("validated") },
                _ => {
                    let i = n.infoset.expect("validated");
                    let map = n.children.as_ref().expect("validated");
                    let children: Vec<NodeId> = infosets[i].actions.iter().map(|a| map[a.as_str()]).collect();
                    for (a, &c) in children.iter().enumerate() {
                        parent[c] = Some((n.id, a));
                    }
                    Node::Decision { player: infosets[i].owner, infoset: i, children }
                }
            });
        }
        let root = (0..nodes.len()).find(|&v| parent[v].is_none()).expect("validated");
        Ok(Self::assemble(doc.players.clone(), nodes, root, parent, infosets))
    }

    fn assemble(
        players: Vec<String>,
        nodes: Vec<Node>,
        root: NodeId,
        parent: Vec<Option<(NodeId, usize)>>,
        infosets: Vec<Infoset>,
    ) -> GameTree {
        let n = nodes.len();
        let order = preorder(&nodes, root);

        // Parent sequence (as infoset/action) of each infoset, and forest
        // children in order of first encounter during the preorder walk.
        let mut last: Vec<[Option<(InfosetId, usize)>; 2]> = vec![[None, None]; n];
        let mut parent_pair: Vec<Option<Option<(InfosetId, usize)>>> = vec![None; infosets.len()];
        let mut forest: [HashMap<Option<(InfosetId, usize)>, Vec<InfosetId>>; 2] = Default::default();
        for &v in &order {
            if let Node::Decision { player, infoset, children } = &nodes[v] {
                let p = player.index();
                if parent_pair[*infoset].is_none() {
                    parent_pair[*infoset] = Some(last[v][p]);
                    forest[p].entry(last[v][p]).or_default().push(*infoset);
                }
                for (a, &c) in children.iter().enumerate() {
                    let mut h = last[v];
                    h[p] = Some((*infoset, a));
                    last[c] = h;
                }
            }
        }

        let forms = [0, 1].map(|p| build_form(Player::from_index(p), &infosets, &forest[p]));
        let node_seq: Vec<[SeqId; 2]> = last
            .iter()
            .map(|h| {
                [0, 1].map(|p| match h[p] {
                    None => EMPTY_SEQ,
                    Some((i, a)) => forms[p].seq_of(i, a).expect("sequence exists"),
                })
            })
            .collect();
        let mut terminals: Vec<NodeId> = (0..n).filter(|&v| matches!(nodes[v], Node::Terminal { .. })).collect();
        terminals.sort_unstable();
        GameTree { players, nodes, root, parent, infosets, forms, node_seq, terminals }
    }

    pub fn to_doc(&self) -> GameDoc {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| match n {
                Node::Terminal { payoffs } => NodeDoc {
                    id,
                    kind: NodeKind::Terminal,
                    owner: None,
                    infoset: None,
                    children: None,
                    payoffs: Some(*payoffs),
                },
                Node::Decision { player, infoset, children } => NodeDoc {
                    id,
                    kind: NodeKind::Decision,
                    owner: Some(*player),
                    infoset: Some(*infoset),
                    children: Some(
                        self.infosets[*infoset].actions.iter().cloned().zip(children.iter().copied()).collect(),
                    ),
                    payoffs: None,
                },
            })
            .collect();
        let infosets = self
            .infosets
            .iter()
            .map(|i| InfosetDoc {
                id: i.id,
                owner: i.owner,
                nodes: i.nodes.clone(),
                actions: i.actions.clone(),
                label: i.label.clone(),
            })
            .collect();
        GameDoc { players: self.players.clone(), nodes, infosets }
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, v: NodeId) -> &Node {
        &self.nodes[v]
    }

    pub fn parent(&self, v: NodeId) -> Option<(NodeId, usize)> {
        self.parent[v]
    }

    pub fn infosets(&self) -> &[Infoset] {
        &self.infosets
    }

    pub fn infoset(&self, i: InfosetId) -> &Infoset {
        &self.infosets[i]
    }

    pub fn form(&self, p: Player) -> &SequenceForm {
        &self.forms[p.index()]
    }

    /// Terminal node ids, ascending. Terminal indices used elsewhere index this list.
    pub fn terminals(&self) -> &[NodeId] {
        &self.terminals
    }

    pub fn payoffs(&self, t: usize) -> [f64; 2] {
        match self.nodes[self.terminals[t]] {
            Node::Terminal { payoffs } => payoffs,
            Node::Decision { .. } => unreachable!("terminal list holds terminals only"),
        }
    }

    /// Last sequence of player `p` on the root path to node `v` (exclusive).
    pub fn seq_at(&self, v: NodeId, p: Player) -> SeqId {
        self.node_seq[v][p.index()]
    }

    /// `σ_p(z)` for terminal index `t`.
    pub fn terminal_seq(&self, t: usize, p: Player) -> SeqId {
        self.node_seq[self.terminals[t]][p.index()]
    }

    pub fn sequence(&self, p: Player, s: SeqId) -> Sequence {
        let form = self.form(p);
        Sequence { owner: p, last: form.seq_infoset[s].map(|k| (form.infosets[k], form.seq_action[s])) }
    }

    /// Sequences of `p` with the empty sequence first, parents before children.
    pub fn sequences(&self, p: Player) -> Vec<Sequence> {
        (0..self.form(p).n_sequences()).map(|s| self.sequence(p, s)).collect()
    }

    /// Human-readable `(infoset, action label)` for a sequence, `None` when empty.
    pub fn seq_label(&self, p: Player, s: SeqId) -> Option<(InfosetId, &str)> {
        self.sequence(p, s).last.map(|(i, a)| (i, self.infosets[i].actions[a].as_str()))
    }

    pub fn terminal_partition(&self, p: Player, trigger: SeqId) -> Result<TerminalPartition> {
        let form = self.form(p);
        let k = match form.seq_infoset.get(trigger) {
            Some(Some(k)) => *k,
            _ => return Err(Error::UnknownSequence { player: p, seq: trigger }),
        };
        let (lo, hi) = (form.first_seq[k], form.subtree_seq_end[k]);
        let mut part = TerminalPartition { player: p, trigger, trig: vec![], info: vec![], outside: vec![] };
        for t in 0..self.terminals.len() {
            let s = self.terminal_seq(t, p);
            if s < lo || s >= hi {
                part.outside.push(t);
                continue;
            }
            // Walk up to the block of `k` to find which of its actions was taken.
            let mut cur = s;
            while form.seq_infoset[cur] != Some(k) {
                cur = form.parent_of_seq(cur).expect("inside subtree");
            }
            if cur == trigger {
                part.trig.push(t);
            } else {
                part.info.push(t);
            }
        }
        Ok(part)
    }

    /// Number of sequences of each player, counting the empty sequence.
    pub fn sequence_counts(&self) -> [usize; 2] {
        [self.forms[0].n_sequences(), self.forms[1].n_sequences()]
    }

    pub fn n_actions_total(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                Node::Decision { children, .. } => children.len(),
                Node::Terminal { .. } => 0,
            })
            .sum()
    }
}

fn preorder(nodes: &[Node], root: NodeId) -> Vec<NodeId> {
    let mut order = Vec::with_capacity(nodes.len());
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        order.push(v);
        if let Node::Decision { children, .. } = &nodes[v] {
            stack.extend(children.iter().rev());
        }
    }
    order
}

fn build_form(
    player: Player,
    infosets: &[Infoset],
    forest: &HashMap<Option<(InfosetId, usize)>, Vec<InfosetId>>,
) -> SequenceForm {
    let mut f = SequenceForm {
        player,
        infosets: vec![],
        n_actions: vec![],
        first_seq: vec![],
        parent_seq: vec![],
        subtree_end: vec![],
        subtree_seq_end: vec![],
        seq_infoset: vec![None],
        seq_action: vec![0],
        children: vec![vec![]],
        local_of: HashMap::new(),
    };

    fn visit(
        f: &mut SequenceForm,
        infosets: &[Infoset],
        forest: &HashMap<Option<(InfosetId, usize)>, Vec<InfosetId>>,
        i: InfosetId,
        parent_seq: SeqId,
    ) {
        let k = f.infosets.len();
        let na = infosets[i].actions.len();
        let first = f.seq_infoset.len();
        f.infosets.push(i);
        f.n_actions.push(na);
        f.first_seq.push(first);
        f.parent_seq.push(parent_seq);
        f.subtree_end.push(0);
        f.subtree_seq_end.push(0);
        f.local_of.insert(i, k);
        f.children[parent_seq].push(k);
        for a in 0..na {
            f.seq_infoset.push(Some(k));
            f.seq_action.push(a);
            f.children.push(vec![]);
        }
        for a in 0..na {
            if let Some(kids) = forest.get(&Some((i, a))) {
                for &c in kids {
                    visit(f, infosets, forest, c, first + a);
                }
            }
        }
        f.subtree_end[k] = f.infosets.len();
        f.subtree_seq_end[k] = f.seq_infoset.len();
    }

    if let Some(roots) = forest.get(&None) {
        for &i in roots {
            visit(&mut f, infosets, forest, i, EMPTY_SEQ);
        }
    }
    f
}

// ---------------------------------------------------------------------------
// Builder used by the generators
// ---------------------------------------------------------------------------

/// Incremental construction of a game in preorder. Infosets are keyed by an
/// arbitrary string chosen by the caller (typically the acting player's
/// observation history); ids are handed out in order of first use.
#[derive(Debug, Default)]
pub struct GameBuilder {
    nodes: Vec<Node>,
    parent: Vec<Option<(NodeId, usize)>>,
    infosets: Vec<Infoset>,
    keys: HashMap<(Player, String), InfosetId>,
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn terminal(&mut self, payoffs: [f64; 2]) -> NodeId {
        self.nodes.push(Node::Terminal { payoffs });
        self.parent.push(None);
        self.nodes.len() - 1
    }

    /// Adds a decision node whose children are filled in later with [`GameBuilder::set_child`].
    pub fn decision(&mut self, player: Player, key: String, actions: &[String]) -> NodeId {
        let id = self.nodes.len();
        let next = self.infosets.len();
        let infoset = *self.keys.entry((player, key.clone())).or_insert(next);
        if infoset == next {
            self.infosets.push(Infoset {
                id: next,
                owner: player,
                actions: actions.to_vec(),
                nodes: vec![],
                label: Some(key),
            });
        }
        debug_assert_eq!(self.infosets[infoset].actions, actions, "infoset action mismatch");
        self.infosets[infoset].nodes.push(id);
        self.nodes.push(Node::Decision { player, infoset, children: vec![usize::MAX; actions.len()] });
        self.parent.push(None);
        id
    }

    pub fn set_child(&mut self, node: NodeId, action: usize, child: NodeId) {
        if let Node::Decision { children, .. } = &mut self.nodes[node] {
            children[action] = child;
        }
        self.parent[child] = Some((node, action));
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn finish(self, players: [&str; 2]) -> GameTree {
        GameTree::assemble(players.iter().map(|s| s.to_string()).collect(), self.nodes, 0, self.parent, self.infosets)
    }
}
