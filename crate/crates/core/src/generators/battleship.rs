//! General-sum Battleship.
//!
//! Players alternate placing ships (Player 1 first, ships in list order), then
//! alternate shooting (Player 1 first). Placements are private; shot cells and
//! their hit/miss/sunk outcomes are public. The game ends once both players have
//! fired `rounds` shots or a fleet is destroyed.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameBuilder, GameTree, NodeId, Player};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ship {
    pub length: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BattleshipParams {
    pub height: usize,
    pub width: usize,
    pub ships: Vec<Ship>,
    pub rounds: usize,
    /// Loss multiplier applied to the value of one's own destroyed ships.
    pub gamma: f64,
    /// Allow a player to fire again at a cell they already shot.
    #[serde(default)]
    pub allow_repeat_shots: bool,
    #[serde(default = "default_cap")]
    pub node_cap: usize,
}

fn default_cap() -> usize {
    super::DEFAULT_NODE_CAP
}

impl BattleshipParams {
    pub fn new(height: usize, width: usize, ships: Vec<Ship>, rounds: usize, gamma: f64) -> Self {
        BattleshipParams { height, width, ships, rounds, gamma, allow_repeat_shots: false, node_cap: default_cap() }
    }

    fn check(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::InvalidParams("grid dimensions must be positive".into()));
        }
        if self.ships.is_empty() {
            return Err(Error::InvalidParams("at least one ship is required".into()));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidParams("rounds must be at least 1".into()));
        }
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!("gamma must be >= 1, got {}", self.gamma)));
        }
        for (j, s) in self.ships.iter().enumerate() {
            if s.length == 0 || !s.value.is_finite() {
                return Err(Error::InvalidParams(format!("ship {j} needs positive length and finite value")));
            }
            if s.length > self.height.max(self.width) {
                return Err(Error::Unsatisfiable {
                    ship: j,
                    reason: format!("length {} does not fit a {}x{} grid", s.length, self.height, self.width),
                });
            }
        }
        let total: usize = self.ships.iter().map(|s| s.length).sum();
        if total > self.height * self.width {
            return Err(Error::Unsatisfiable {
                ship: self.ships.len() - 1,
                reason: format!("fleet covers {total} cells but the grid has {}", self.height * self.width),
            });
        }
        Ok(())
    }
}

type Cell = (usize, usize);

#[derive(Clone, Debug)]
struct Placement {
    label: String,
    cells: Vec<Cell>,
}

#[derive(Clone, Debug, Default)]
struct Fleet {
    ships: Vec<Vec<Cell>>,
    labels: Vec<String>,
    /// Cells of each ship not yet hit.
    remaining: Vec<usize>,
}

impl Fleet {
    fn occupied(&self, c: Cell) -> Option<usize> {
        self.ships.iter().position(|s| s.contains(&c))
    }

    fn destroyed(&self) -> bool {
        self.remaining.iter().all(|&r| r == 0)
    }
}

struct Gen<'a> {
    params: &'a BattleshipParams,
    b: GameBuilder,
    /// `(terminal node, fleet value lost by P1 and P2)`.
    losses: Vec<(NodeId, [f64; 2])>,
}

#[derive(Clone)]
struct State {
    fleets: [Fleet; 2],
    shots: [Vec<Cell>; 2],
    /// Public record of shots and outcomes.
    public: String,
}

pub fn gen_battleship(params: &BattleshipParams) -> Result<GameTree> {
    gen_battleship_with_losses(params).map(|(g, _)| g)
}

/// Like [`gen_battleship`], also returning the fleet value lost by each
/// player at every terminal, in `terminals()` order.
pub fn gen_battleship_with_losses(params: &BattleshipParams) -> Result<(GameTree, Vec<[f64; 2]>)> {
    params.check()?;
    let mut g = Gen { params, b: GameBuilder::new(), losses: vec![] };
    let state = State { fleets: [Fleet::default(), Fleet::default()], shots: [vec![], vec![]], public: String::new() };
    g.place(state, 0, Player::One)?;
    let by_node: HashMap<NodeId, [f64; 2]> = g.losses.into_iter().collect();
    let tree = g.b.finish(["P1", "P2"]);
    let losses = tree.terminals().iter().map(|z| by_node[z]).collect();
    Ok((tree, losses))
}

impl Gen<'_> {
    fn key(&self, p: Player, s: &State) -> String {
        let own = &s.fleets[p.index()].labels;
        let opp = s.fleets[p.opponent().index()].labels.len();
        format!("{p}|own={}|opp_placed={opp}|{}", own.join(","), s.public)
    }

    fn guard(&self) -> Result<()> {
        if self.b.node_count() > self.params.node_cap {
            return Err(Error::TooLarge {
                what: "battleship tree nodes",
                count: self.b.node_count() as u128,
                cap: self.params.node_cap as u128,
            });
        }
        Ok(())
    }

    fn placements(&self, fleet: &Fleet, ship: usize) -> Vec<Placement> {
        let (h, w) = (self.params.height, self.params.width);
        let len = self.params.ships[ship].length;
        let mut out: Vec<Placement> = Vec::new();
        for x in 0..h {
            for y in 0..w {
                for (tag, dx, dy) in [('h', 0, 1), ('v', 1, 0)] {
                    if x + dx * (len - 1) >= h || y + dy * (len - 1) >= w {
                        continue;
                    }
                    let cells: Vec<Cell> = (0..len).map(|k| (x + dx * k, y + dy * k)).collect();
                    if cells.iter().any(|&c| fleet.occupied(c).is_some()) {
                        continue;
                    }
                    // A length-1 ship has one placement per cell.
                    if out.iter().any(|p| p.cells == cells) {
                        continue;
                    }
                    out.push(Placement { label: format!("place:{x},{y},{tag}"), cells });
                }
            }
        }
        out
    }

    fn place(&mut self, state: State, ship: usize, p: Player) -> Result<NodeId> {
        self.guard()?;
        if ship == self.params.ships.len() {
            return self.shoot(state, Player::One);
        }
        let options = self.placements(&state.fleets[p.index()], ship);
        if options.is_empty() {
            return Err(Error::Unsatisfiable {
                ship,
                reason: format!("{p} has no room left after placing {:?}", state.fleets[p.index()].labels),
            });
        }
        let labels: Vec<String> = options.iter().map(|o| o.label.clone()).collect();
        let node = self.b.decision(p, self.key(p, &state), &labels);
        let (next_ship, next_p) = match p {
            Player::One => (ship, Player::Two),
            Player::Two => (ship + 1, Player::One),
        };
        for (a, opt) in options.into_iter().enumerate() {
            let mut s = state.clone();
            let fleet = &mut s.fleets[p.index()];
            fleet.remaining.push(opt.cells.len());
            fleet.ships.push(opt.cells);
            fleet.labels.push(opt.label);
            let child = self.place(s, next_ship, next_p)?;
            self.b.set_child(node, a, child);
        }
        Ok(node)
    }

    fn shoot(&mut self, state: State, p: Player) -> Result<NodeId> {
        self.guard()?;
        let done =
            state.shots.iter().all(|s| s.len() == self.params.rounds) || state.fleets.iter().any(Fleet::destroyed);
        if done {
            let lost = self.lost(&state);
            let z = self.b.terminal([lost[1] - self.params.gamma * lost[0], lost[0] - self.params.gamma * lost[1]]);
            self.losses.push((z, lost));
            return Ok(z);
        }
        let (h, w) = (self.params.height, self.params.width);
        let cells: Vec<Cell> = (0..h)
            .flat_map(|x| (0..w).map(move |y| (x, y)))
            .filter(|c| self.params.allow_repeat_shots || !state.shots[p.index()].contains(c))
            .collect();
        let labels: Vec<String> = cells.iter().map(|(x, y)| format!("shoot:{x},{y}")).collect();
        let node = self.b.decision(p, self.key(p, &state), &labels);
        for (a, &c) in cells.iter().enumerate() {
            let mut s = state.clone();
            s.shots[p.index()].push(c);
            let target = &mut s.fleets[p.opponent().index()];
            let outcome = match target.occupied(c) {
                None => 'm',
                Some(j) => {
                    // A repeated shot on an already-hit cell is a plain hit.
                    let first_hit = !state.shots[p.index()].contains(&c);
                    if first_hit {
                        target.remaining[j] -= 1;
                    }
                    if target.remaining[j] == 0 && first_hit {
                        's'
                    } else {
                        'h'
                    }
                }
            };
            let _ = write!(s.public, "{p}@{},{}:{outcome};", c.0, c.1);
            let child = self.shoot(s, p.opponent())?;
            self.b.set_child(node, a, child);
        }
        Ok(node)
    }

    fn lost(&self, s: &State) -> [f64; 2] {
        let lost = |p: usize| -> f64 {
            s.fleets[p]
                .remaining
                .iter()
                .zip(&self.params.ships)
                .filter(|(r, _)| **r == 0)
                .map(|(_, ship)| ship.value)
                .sum()
        };
        [lost(0), lost(1)]
    }
}
