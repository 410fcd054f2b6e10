//! Linear-program formulations of the equilibrium problem and writers for the
//! CPLEX LP and free MPS formats.
//!
//! Each trigger's inner maximization is replaced by its sequence-form dual, so
//! every model is linear in `ξ`, the dual vectors `ν` and (for
//! [`Formulation::MinDeviation`]) the scalar `u`.
//!
//! Naming scheme:
//!
//! | item | name |
//! |------|------|
//! | `ξ` entry of pair `k` | `xi_{k}` |
//! | `ν` of trigger `(p, σ̂)` at deviator local infoset `j` | `nu_{p}_{σ̂}_{j}` |
//! | deviation bound | `u` |
//! | `ξ[∅,∅] = 1` | `norm` |
//! | player-1 consistency row of column `σ₂`, infoset `j` | `x1_{σ₂}_{j}` |
//! | player-2 consistency row of row `σ₁`, infoset `j` | `x2_{σ₁}_{j}` |
//! | dual row of trigger `(p, σ̂)` for deviator sequence `s` | `dual_{p}_{σ̂}_{s}` |
//! | trigger row | `trig_{p}_{σ̂}` |
//!
//! `p` is 1 or 2, sequences and infosets use the player's local numbering.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Player, SeqId};
use crate::polytope::Polytope;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    MinDeviation,
    FeasDeviation,
    MaximumSw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpFormat {
    Lp,
    Mps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Var {
    pub name: String,
    /// `true` for `(-∞, ∞)`, otherwise `[0, ∞)`.
    pub free: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    pub sense: Sense,
    pub objective: Vec<(usize, f64)>,
    pub vars: Vec<Var>,
    pub constraints: Vec<Constraint>,
}

impl LpModel {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Constraint rows and objective keyed by names, for comparing models whose
    /// variables may be numbered differently.
    pub fn by_name(&self) -> NamedModel {
        let named = |c: &[(usize, f64)]| -> BTreeMap<String, f64> {
            c.iter().map(|&(j, v)| (self.vars[j].name.clone(), v)).collect()
        };
        NamedModel {
            maximize: self.sense == Sense::Maximize,
            objective: named(&self.objective),
            constraints: self.constraints.iter().map(|c| (c.name.clone(), (named(&c.coeffs), c.cmp, c.rhs))).collect(),
            free: {
                let mut f: Vec<String> = self.vars.iter().filter(|v| v.free).map(|v| v.name.clone()).collect();
                f.sort();
                f
            },
        }
    }
}

/// Name-keyed view of a model.
#[derive(Debug, PartialEq)]
pub struct NamedModel {
    pub maximize: bool,
    pub objective: BTreeMap<String, f64>,
    pub constraints: BTreeMap<String, (BTreeMap<String, f64>, Cmp, f64)>,
    /// Sorted names of free variables.
    pub free: Vec<String>,
}

fn pnum(p: Player) -> usize {
    p.index() + 1
}

/// Builds the chosen formulation. The first `pairs.len()` variables are the
/// `ξ` entries in pair order.
pub fn build_lp(poly: &Polytope, formulation: Formulation) -> LpModel {
    let game = poly.game;
    let n = poly.pairs.len();
    let mut vars: Vec<Var> = (0..n).map(|k| Var { name: format!("xi_{k}"), free: false }).collect();
    let mut constraints = vec![];

    constraints.push(Constraint { name: "norm".into(), coeffs: vec![(0, 1.0)], cmp: Cmp::Eq, rhs: 1.0 });
    for (tag, systems) in [("x1", &poly.consistency.x1), ("x2", &poly.consistency.x2)] {
        for sys in systems.iter() {
            for row in &sys.rows {
                let Some(parent) = row.parent else { continue };
                let j = row.infoset.expect("flow row has an infoset");
                let mut coeffs: Vec<(usize, f64)> =
                    row.children.iter().map(|&c| (sys.vars[c as usize] as usize, 1.0)).collect();
                coeffs.push((sys.vars[parent as usize] as usize, -1.0));
                constraints.push(Constraint {
                    name: format!("{tag}_{}_{j}", sys.fixed),
                    coeffs,
                    cmp: Cmp::Eq,
                    rhs: 0.0,
                });
            }
        }
    }

    let u_var = (formulation == Formulation::MinDeviation).then(|| {
        vars.push(Var { name: "u".into(), free: true });
        vars.len() - 1
    });

    // terminal lists per own sequence, for each player
    let by_seq: [Vec<Vec<usize>>; 2] = Player::BOTH.map(|p| {
        let mut v = vec![vec![]; game.form(p).n_sequences()];
        for t in 0..game.terminals().len() {
            v[game.terminal_seq(t, p)].push(t);
        }
        v
    });

    for p in Player::BOTH {
        let form = game.form(p);
        let pi = p.index();
        for trigger in 1..form.n_sequences() {
            let k = form.seq_infoset[trigger].expect("non-empty");
            let nu_base = vars.len();
            for j in k..form.subtree_end[k] {
                vars.push(Var { name: format!("nu_{}_{trigger}_{j}", pnum(p)), free: true });
            }
            let nu = |j: usize| nu_base + (j - k);
            for s in form.first_seq[k]..form.subtree_seq_end[k] {
                let j = form.seq_infoset[s].expect("non-empty");
                let mut coeffs = vec![(nu(j), 1.0)];
                coeffs.extend(form.children[s].iter().map(|&c| (nu(c), -1.0)));
                let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
                for &t in &by_seq[pi][s] {
                    let other = game.terminal_seq(t, p.opponent());
                    let w = poly.pairs.index_for(p, trigger, other).expect("relevant weight");
                    *weights.entry(w).or_insert(0.0) -= poly.terminals.payoffs[t][pi];
                }
                coeffs.extend(weights.into_iter().filter(|&(_, v)| v != 0.0));
                constraints.push(Constraint {
                    name: format!("dual_{}_{trigger}_{s}", pnum(p)),
                    coeffs,
                    cmp: Cmp::Ge,
                    rhs: 0.0,
                });
            }

            let mut base: BTreeMap<usize, f64> = BTreeMap::new();
            collect_trig(form, trigger, &by_seq[pi], &mut |t| {
                *base.entry(poly.terminals.pair[t] as usize).or_insert(0.0) += poly.terminals.payoffs[t][pi];
            });
            let base = base.into_iter().filter(|&(_, v)| v != 0.0);
            let name = format!("trig_{}_{trigger}", pnum(p));
            let c = match u_var {
                Some(u) => {
                    let mut coeffs = vec![(u, 1.0), (nu(k), -1.0)];
                    coeffs.extend(base);
                    Constraint { name, coeffs, cmp: Cmp::Ge, rhs: 0.0 }
                }
                None => {
                    let mut coeffs = vec![(nu(k), 1.0)];
                    coeffs.extend(base.map(|(w, v)| (w, -v)));
                    Constraint { name, coeffs, cmp: Cmp::Le, rhs: 0.0 }
                }
            };
            constraints.push(c);
        }
    }

    let (sense, objective) = match formulation {
        Formulation::MinDeviation => (Sense::Minimize, vec![(u_var.expect("u exists"), 1.0)]),
        Formulation::FeasDeviation => (Sense::Minimize, vec![]),
        Formulation::MaximumSw => {
            let mut sw: BTreeMap<usize, f64> = BTreeMap::new();
            for (&k, u) in poly.terminals.pair.iter().zip(&poly.terminals.payoffs) {
                *sw.entry(k as usize).or_insert(0.0) += u[0] + u[1];
            }
            (Sense::Maximize, sw.into_iter().filter(|&(_, v)| v != 0.0).collect())
        }
    };
    LpModel { sense, objective, vars, constraints }
}

/// Expected payoff of `p` as a linear objective over the `ξ` variables.
pub fn payoff_objective(poly: &Polytope, p: Player) -> Vec<(usize, f64)> {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for (&k, u) in poly.terminals.pair.iter().zip(&poly.terminals.payoffs) {
        *acc.entry(k as usize).or_insert(0.0) += u[p.index()];
    }
    acc.into_iter().filter(|&(_, v)| v != 0.0).collect()
}

/// Turns a welfare-maximizing model into a tie-breaking stage: welfare is held
/// at `floor` or above (row `sw_floor`) and the payoff of `p` is maximized.
pub fn lexicographic_stage(model: &mut LpModel, poly: &Polytope, floor: f64, p: Player) {
    let mut sw: BTreeMap<usize, f64> = BTreeMap::new();
    for (&k, u) in poly.terminals.pair.iter().zip(&poly.terminals.payoffs) {
        *sw.entry(k as usize).or_insert(0.0) += u[0] + u[1];
    }
    model.constraints.push(Constraint {
        name: "sw_floor".into(),
        coeffs: sw.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        cmp: Cmp::Ge,
        rhs: floor,
    });
    model.sense = Sense::Maximize;
    model.objective = payoff_objective(poly, p);
}

/// Calls `f` for every terminal reached through `trigger`.
fn collect_trig(form: &crate::game::SequenceForm, trigger: SeqId, by_seq: &[Vec<usize>], f: &mut impl FnMut(usize)) {
    for &t in &by_seq[trigger] {
        f(t);
    }
    for &c in &form.children[trigger] {
        for s in form.first_seq[c]..form.subtree_seq_end[c] {
            for &t in &by_seq[s] {
                f(t);
            }
        }
    }
}

const TERMS_PER_LINE: usize = 8;

fn write_terms(w: &mut impl Write, model: &LpModel, coeffs: &[(usize, f64)]) -> std::io::Result<()> {
    if coeffs.is_empty() {
        // Some readers reject an empty expression.
        return write!(w, " 0 {}", model.vars[0].name);
    }
    for (i, &(j, v)) in coeffs.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            write!(w, "\n   ")?;
        }
        let sign = if v.is_sign_negative() { '-' } else { '+' };
        write!(w, " {sign} {} {}", v.abs(), model.vars[j].name)?;
    }
    Ok(())
}

/// CPLEX LP text format.
pub fn write_lp(model: &LpModel, mut w: impl Write) -> Result<()> {
    let w = &mut w;
    writeln!(w, "\\ extensive-form correlated equilibrium model")?;
    writeln!(w, "{}", if model.sense == Sense::Maximize { "Maximize" } else { "Minimize" })?;
    write!(w, " obj:")?;
    write_terms(w, model, &model.objective)?;
    writeln!(w)?;
    writeln!(w, "Subject To")?;
    for c in &model.constraints {
        write!(w, " {}:", c.name)?;
        write_terms(w, model, &c.coeffs)?;
        let op = match c.cmp {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        };
        writeln!(w, " {op} {}", c.rhs)?;
    }
    writeln!(w, "Bounds")?;
    for v in model.vars.iter().filter(|v| v.free) {
        writeln!(w, " {} free", v.name)?;
    }
    writeln!(w, "End")?;
    Ok(())
}

/// Free MPS format with an `OBJSENSE` section.
pub fn write_mps(model: &LpModel, mut w: impl Write) -> Result<()> {
    let w = &mut w;
    writeln!(w, "NAME efce")?;
    writeln!(w, "OBJSENSE")?;
    writeln!(w, "    {}", if model.sense == Sense::Maximize { "MAX" } else { "MIN" })?;
    writeln!(w, "ROWS")?;
    writeln!(w, " N obj")?;
    for c in &model.constraints {
        let t = match c.cmp {
            Cmp::Le => 'L',
            Cmp::Ge => 'G',
            Cmp::Eq => 'E',
        };
        writeln!(w, " {t} {}", c.name)?;
    }
    let mut cols: Vec<Vec<(&str, f64)>> = vec![vec![]; model.vars.len()];
    for &(j, v) in &model.objective {
        cols[j].push(("obj", v));
    }
    for c in &model.constraints {
        for &(j, v) in &c.coeffs {
            cols[j].push((&c.name, v));
        }
    }
    writeln!(w, "COLUMNS")?;
    for (j, entries) in cols.iter().enumerate() {
        if entries.is_empty() {
            // keep the column declared
            writeln!(w, "    {} obj 0", model.vars[j].name)?;
        }
        for (row, v) in entries {
            writeln!(w, "    {} {row} {v}", model.vars[j].name)?;
        }
    }
    writeln!(w, "RHS")?;
    for c in model.constraints.iter().filter(|c| c.rhs != 0.0) {
        writeln!(w, "    RHS {} {}", c.name, c.rhs)?;
    }
    writeln!(w, "BOUNDS")?;
    for v in model.vars.iter().filter(|v| v.free) {
        writeln!(w, " FR BND {}", v.name)?;
    }
    writeln!(w, "ENDATA")?;
    Ok(())
}

pub fn write_model(model: &LpModel, format: LpFormat, w: impl Write) -> Result<()> {
    match format {
        LpFormat::Lp => write_lp(model, w),
        LpFormat::Mps => write_mps(model, w),
    }
}

struct VarTable {
    vars: Vec<Var>,
    index: HashMap<String, usize>,
}

impl VarTable {
    fn new() -> Self {
        VarTable { vars: vec![], index: HashMap::new() }
    }

    fn get(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        self.vars.push(Var { name: name.to_string(), free: false });
        self.index.insert(name.to_string(), self.vars.len() - 1);
        self.vars.len() - 1
    }
}

fn parse_num(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|_| Error::LpParse { line, msg: format!("bad number `{s}`") })
}

/// Reads the subset of the LP format produced by [`write_lp`].
pub fn read_lp(r: impl BufRead) -> Result<LpModel> {
    #[derive(PartialEq)]
    enum Section {
        Start,
        Objective,
        Constraints,
        Bounds,
        End,
    }
    let mut section = Section::Start;
    let mut sense = Sense::Minimize;
    let mut table = VarTable::new();
    let mut objective = vec![];
    let mut constraints = vec![];
    // Statement being accumulated: (first line, text).
    let mut pending: Option<(usize, String)> = None;

    let mut finish = |stmt: (usize, String), section: &Section, table: &mut VarTable| -> Result<()> {
        let (line, text) = stmt;
        let (name, body) =
            text.split_once(':').ok_or_else(|| Error::LpParse { line, msg: "missing row name".into() })?;
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let mut coeffs = vec![];
        let mut i = 0;
        let mut tail = None;
        while i < tokens.len() {
            match tokens[i] {
                "<=" | ">=" | "=" => {
                    let cmp = match tokens[i] {
                        "<=" => Cmp::Le,
                        ">=" => Cmp::Ge,
                        _ => Cmp::Eq,
                    };
                    let rhs = tokens.get(i + 1).ok_or_else(|| Error::LpParse { line, msg: "missing rhs".into() })?;
                    tail = Some((cmp, parse_num(rhs, line)?));
                    break;
                }
                "+" | "-" => {
                    let neg = tokens[i] == "-";
                    let (v, var) = match (tokens.get(i + 1), tokens.get(i + 2)) {
                        (Some(v), Some(var)) => (parse_num(v, line)?, *var),
                        _ => return Err(Error::LpParse { line, msg: "truncated term".into() }),
                    };
                    coeffs.push((table.get(var), if neg { -v } else { v }));
                    i += 3;
                }
                tok => {
                    // a leading term without sign, e.g. "0 xi_0"
                    let v = parse_num(tok, line)?;
                    let var = tokens.get(i + 1).ok_or_else(|| Error::LpParse { line, msg: "truncated term".into() })?;
                    let j = table.get(var);
                    if v != 0.0 {
                        coeffs.push((j, v));
                    }
                    i += 2;
                }
            }
        }
        match section {
            Section::Objective => objective = coeffs,
            Section::Constraints => {
                let (cmp, rhs) = tail.ok_or_else(|| Error::LpParse { line, msg: "missing comparison".into() })?;
                constraints.push(Constraint { name: name.trim().to_string(), coeffs, cmp, rhs });
            }
            _ => return Err(Error::LpParse { line, msg: "expression outside a section".into() }),
        }
        Ok(())
    };

    for (no, line) in r.lines().enumerate() {
        let line = line?;
        let no = no + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('\\') {
            continue;
        }
        let header = match text.to_ascii_lowercase().as_str() {
            "minimize" => Some((Section::Objective, Some(Sense::Minimize))),
            "maximize" => Some((Section::Objective, Some(Sense::Maximize))),
            "subject to" => Some((Section::Constraints, None)),
            "bounds" => Some((Section::Bounds, None)),
            "end" => Some((Section::End, None)),
            _ => None,
        };
        if let Some((next, s)) = header {
            if let Some(stmt) = pending.take() {
                finish(stmt, &section, &mut table)?;
            }
            if let Some(s) = s {
                sense = s;
            }
            section = next;
            continue;
        }
        match section {
            Section::Objective | Section::Constraints => {
                // a line with a name starts a new statement; others continue it
                let starts = text.split_whitespace().next().is_some_and(|t| t.ends_with(':'));
                if starts {
                    if let Some(stmt) = pending.take() {
                        finish(stmt, &section, &mut table)?;
                    }
                    pending = Some((no, text.to_string()));
                } else {
                    match pending.as_mut() {
                        Some((_, s)) => {
                            s.push(' ');
                            s.push_str(text);
                        }
                        None => return Err(Error::LpParse { line: no, msg: "continuation without statement".into() }),
                    }
                }
            }
            Section::Bounds => {
                let parts: Vec<&str> = text.split_whitespace().collect();
                match parts.as_slice() {
                    [name, kw] if kw.eq_ignore_ascii_case("free") => {
                        let j = table.get(name);
                        table.vars[j].free = true;
                    }
                    _ => return Err(Error::LpParse { line: no, msg: format!("unsupported bound `{text}`") }),
                }
            }
            Section::Start | Section::End => {
                return Err(Error::LpParse { line: no, msg: format!("unexpected `{text}`") });
            }
        }
    }
    if let Some(stmt) = pending.take() {
        finish(stmt, &section, &mut table)?;
    }
    Ok(LpModel { sense, objective, vars: table.vars, constraints })
}

/// Reads the subset of free MPS produced by [`write_mps`].
pub fn read_mps(r: impl BufRead) -> Result<LpModel> {
    let mut section = String::new();
    let mut sense = Sense::Minimize;
    let mut table = VarTable::new();
    let mut objective = vec![];
    let mut constraints: Vec<Constraint> = vec![];
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut obj_name = String::new();

    for (no, line) in r.lines().enumerate() {
        let line = line?;
        let no = no + 1;
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        if !line.starts_with(' ') {
            section = line.split_whitespace().next().unwrap_or("").to_ascii_uppercase();
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::LpParse { line: no, msg: format!("malformed {section} line") };
        match section.as_str() {
            "OBJSENSE" => {
                sense = match f[0].to_ascii_uppercase().as_str() {
                    "MAX" | "MAXIMIZE" => Sense::Maximize,
                    "MIN" | "MINIMIZE" => Sense::Minimize,
                    _ => return Err(bad()),
                }
            }
            "ROWS" => {
                let [t, name] = f.as_slice() else { return Err(bad()) };
                let cmp = match *t {
                    "N" => {
                        obj_name = name.to_string();
                        continue;
                    }
                    "L" => Cmp::Le,
                    "G" => Cmp::Ge,
                    "E" => Cmp::Eq,
                    _ => return Err(bad()),
                };
                row_index.insert(name.to_string(), constraints.len());
                constraints.push(Constraint { name: name.to_string(), coeffs: vec![], cmp, rhs: 0.0 });
            }
            "COLUMNS" => {
                if f.len() < 3 || f.len().is_multiple_of(2) {
                    return Err(bad());
                }
                let j = table.get(f[0]);
                for pair in f[1..].chunks(2) {
                    let v = parse_num(pair[1], no)?;
                    if pair[0] == obj_name {
                        if v != 0.0 {
                            objective.push((j, v));
                        }
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| Error::LpParse { line: no, msg: format!("unknown row `{}`", pair[0]) })?;
                        constraints[r].coeffs.push((j, v));
                    }
                }
            }
            "RHS" => {
                if f.len() < 3 || f.len().is_multiple_of(2) {
                    return Err(bad());
                }
                for pair in f[1..].chunks(2) {
                    let r = *row_index
                        .get(pair[0])
                        .ok_or_else(|| Error::LpParse { line: no, msg: format!("unknown row `{}`", pair[0]) })?;
                    constraints[r].rhs = parse_num(pair[1], no)?;
                }
            }
            "BOUNDS" => match f.as_slice() {
                ["FR", _, name] => {
                    let j = table.get(name);
                    table.vars[j].free = true;
                }
                _ => return Err(Error::LpParse { line: no, msg: format!("unsupported bound `{}`", line.trim()) }),
            },
            _ => return Err(Error::LpParse { line: no, msg: format!("unexpected section `{section}`") }),
        }
    }
    Ok(LpModel { sense, objective, vars: table.vars, constraints })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameBuilder;
    use crate::generators::{gen_sheriff, SheriffParams};

    #[test]
    fn one_terminal_model() {
        let mut b = GameBuilder::new();
        b.terminal([0.0, 0.0]);
        let g = b.finish(["a", "b"]);
        let poly = Polytope::new(&g);
        let m = build_lp(&poly, Formulation::MaximumSw);
        assert_eq!(m.vars.len(), 1);
        assert_eq!(m.constraints.len(), 1);
        assert_eq!(m.constraints[0].name, "norm");
    }

    #[test]
    fn round_trip_both_formats() {
        let g = gen_sheriff(&SheriffParams::new(5.0, 1.0, 1.0, 1, 1, 1)).unwrap();
        let poly = Polytope::new(&g);
        for f in [Formulation::MinDeviation, Formulation::FeasDeviation, Formulation::MaximumSw] {
            let m = build_lp(&poly, f);
            let mut lp = vec![];
            write_lp(&m, &mut lp).unwrap();
            assert_eq!(read_lp(lp.as_slice()).unwrap().by_name(), m.by_name());
            let mut mps = vec![];
            write_mps(&m, &mut mps).unwrap();
            assert_eq!(read_mps(mps.as_slice()).unwrap().by_name(), m.by_name());
        }
    }

    #[test]
    fn output_is_deterministic() {
        let g = gen_sheriff(&SheriffParams::new(5.0, 1.0, 1.0, 2, 1, 2)).unwrap();
        let poly = Polytope::new(&g);
        let write = || {
            let mut buf = vec![];
            write_mps(&build_lp(&poly, Formulation::MaximumSw), &mut buf).unwrap();
            buf
        };
        assert_eq!(write(), write());
    }

    #[test]
    fn parse_errors_carry_line() {
        let text = "Minimize\n obj: + 1 x\nSubject To\n c1: + 1 x >=\nEnd\n";
        assert!(matches!(read_lp(text.as_bytes()), Err(Error::LpParse { line: 4, .. })));
    }
}
