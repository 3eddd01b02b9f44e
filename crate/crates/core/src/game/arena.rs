use super::{Player, Role};
use crate::model::Model;
use crate::syntax::{
    parse_internal, FId, Fixpoint, Formula, FormulaTable, Node, WellNamedSentence,
};
use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error(
        "binder {formula} reached with role {found} but its antecedent parity gives {expected}"
    )]
    RoleInconsistency {
        formula: String,
        expected: Role,
        found: Role,
    },
    #[error("strategy undefined at owned position {0}")]
    IncompleteStrategy(usize),
    #[error("strategy picks {to}, which is not a move from {from}")]
    IllegalMove { from: usize, to: usize },
    #[error("unknown world {0:?}")]
    UnknownWorld(String),
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error("arena line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub world: usize,
    /// Index into [`GameArena::formulas`].
    pub formula: FId,
    pub role_of_i: Role,
}

/// A finite evaluation game: positions, moves, owner roles and priorities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameArena {
    worlds: Vec<String>,
    formulas: Vec<Formula>,
    positions: Vec<Position>,
    moves: Vec<Vec<usize>>,
    owner: Vec<Role>,
    priority: Vec<u32>,
    initial: Vec<usize>,
}

impl GameArena {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, i: usize) -> Position {
        self.positions[i]
    }

    pub fn moves(&self, i: usize) -> &[usize] {
        &self.moves[i]
    }

    pub fn owner_role(&self, i: usize) -> Role {
        self.owner[i]
    }

    /// I moves exactly where the owner role is the role I currently holds.
    pub fn player(&self, i: usize) -> Player {
        if self.owner[i] == self.positions[i].role_of_i {
            Player::I
        } else {
            Player::II
        }
    }

    pub fn priority(&self, i: usize) -> u32 {
        self.priority[i]
    }

    /// Starting positions `⟨w, φ, V⟩`, one per requested world.
    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn formula(&self, i: usize) -> &Formula {
        &self.formulas[self.positions[i].formula.index()]
    }

    pub fn world_name(&self, i: usize) -> &str {
        &self.worlds[self.positions[i].world]
    }

    pub fn describe(&self, i: usize) -> String {
        format!(
            "⟨{}, {}, {}⟩",
            self.world_name(i),
            self.formula(i),
            self.positions[i].role_of_i
        )
    }

    /// One line per position: `id | world | formula | role_of_I | owner_role | priority | successors…`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            let succ: Vec<String> = self.moves[i].iter().map(|s| s.to_string()).collect();
            writeln!(
                out,
                "{} | {} | {} | {} | {} | {} | {}",
                i,
                self.world_name(i),
                self.formula(i),
                self.positions[i].role_of_i,
                self.owner[i],
                self.priority[i],
                succ.join(" ")
            )
            .expect("string write");
        }
        out
    }
}

fn parse_role(s: &str) -> Option<Role> {
    match s {
        "V" => Some(Role::V),
        "R" => Some(Role::R),
        _ => None,
    }
}

/// Reads the format written by [`GameArena::dump`]. Position 0 is taken as
/// the initial position.
pub fn load_arena(text: &str) -> Result<GameArena, GameError> {
    let mut a = GameArena {
        worlds: Vec::new(),
        formulas: Vec::new(),
        positions: Vec::new(),
        moves: Vec::new(),
        owner: Vec::new(),
        priority: Vec::new(),
        initial: vec![0],
    };
    let mut world_ids: HashMap<String, usize> = HashMap::new();
    let mut formula_ids: HashMap<Formula, FId> = HashMap::new();
    for (ln, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let bad = |message: String| GameError::Malformed {
            line: ln + 1,
            message,
        };
        // the formula column may itself contain " | ", so split from both ends
        let line = if line.ends_with(" |") {
            format!("{line} ")
        } else {
            line.to_string()
        };
        let head: Vec<&str> = line.splitn(3, " | ").collect();
        if head.len() != 3 {
            return Err(bad("expected 7 columns".into()));
        }
        let mut tail: Vec<&str> = head[2].rsplitn(5, " | ").collect();
        if tail.len() != 5 {
            return Err(bad("expected 7 columns".into()));
        }
        tail.reverse();
        let cols = [
            head[0], head[1], tail[0], tail[1], tail[2], tail[3], tail[4],
        ];
        let id: usize = cols[0].trim().parse().map_err(|_| bad("bad id".into()))?;
        if id != a.positions.len() {
            return Err(bad(format!("ids must be consecutive, found {id}")));
        }
        let next_w = world_ids.len();
        let world = *world_ids
            .entry(cols[1].trim().to_string())
            .or_insert(next_w);
        if world == a.worlds.len() {
            a.worlds.push(cols[1].trim().to_string());
        }
        let f = parse_internal(cols[2].trim()).map_err(|e| bad(e.to_string()))?;
        let next_f = FId(formula_ids.len() as u32);
        let fid = *formula_ids.entry(f.clone()).or_insert(next_f);
        if fid.index() == a.formulas.len() {
            a.formulas.push(f);
        }
        let role_of_i = parse_role(cols[3].trim()).ok_or_else(|| bad("bad role".into()))?;
        let owner = parse_role(cols[4].trim()).ok_or_else(|| bad("bad owner".into()))?;
        let priority: u32 = cols[5]
            .trim()
            .parse()
            .map_err(|_| bad("bad priority".into()))?;
        let succ = cols[6]
            .split_whitespace()
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| bad(format!("bad successor {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        a.positions.push(Position {
            world,
            formula: fid,
            role_of_i,
        });
        a.owner.push(owner);
        a.priority.push(priority);
        a.moves.push(succ);
    }
    let n = a.positions.len();
    if n == 0 {
        return Err(GameError::Malformed {
            line: 0,
            message: "empty arena".into(),
        });
    }
    for (i, succ) in a.moves.iter().enumerate() {
        if let Some(&s) = succ.iter().find(|&&s| s >= n) {
            return Err(GameError::Malformed {
                line: i + 1,
                message: format!("successor {s} out of range"),
            });
        }
    }
    Ok(a)
}

struct Builder<'a> {
    m: &'a Model,
    t: &'a FormulaTable,
    arena: GameArena,
    index: HashMap<Position, usize>,
    queue: VecDeque<usize>,
}

impl Builder<'_> {
    fn intern(&mut self, p: Position) -> usize {
        if let Some(&i) = self.index.get(&p) {
            return i;
        }
        let i = self.arena.positions.len();
        self.arena.positions.push(p);
        self.arena.moves.push(Vec::new());
        self.arena.owner.push(Role::V);
        self.arena.priority.push(0);
        self.index.insert(p, i);
        self.queue.push_back(i);
        i
    }

    fn expand(&mut self, i: usize) -> Result<(), GameError> {
        let Position {
            world: v,
            formula: f,
            role_of_i: q,
        } = self.arena.positions[i];
        let m = self.m;
        let at = |u: usize, g: FId, role: Role| Position {
            world: u,
            formula: g,
            role_of_i: role,
        };
        let mut next = Vec::new();
        let owner = match self.t.node(f) {
            Node::Prop(p) => {
                if m.val(p).contains(v) {
                    Role::R
                } else {
                    Role::V
                }
            }
            Node::Bottom => {
                if m.fallible().contains(v) {
                    Role::R
                } else {
                    Role::V
                }
            }
            Node::And(a, b) => {
                next = vec![at(v, *a, q), at(v, *b, q)];
                Role::R
            }
            Node::Or(a, b) => {
                next = vec![at(v, *a, q), at(v, *b, q)];
                Role::V
            }
            Node::Implies(..) => {
                let query = self.t.query_of(f);
                next = m
                    .pre()
                    .successors(v)
                    .iter()
                    .map(|u| at(u, query, q))
                    .collect();
                Role::R
            }
            Node::Query(a, b) => {
                next = vec![at(v, *a, q.flip()), at(v, *b, q)];
                Role::V
            }
            Node::Box(a) => {
                next = m
                    .pre_rel()
                    .successors(v)
                    .iter()
                    .map(|u| at(u, *a, q))
                    .collect();
                Role::R
            }
            Node::Dia(_) => {
                let local = self.t.local_dia_of(f);
                next = m
                    .pre()
                    .successors(v)
                    .iter()
                    .map(|u| at(u, local, q))
                    .collect();
                Role::R
            }
            Node::LocalDia(a) => {
                next = m.rel().successors(v).iter().map(|u| at(u, *a, q)).collect();
                Role::V
            }
            Node::Fix { kind, body, .. } => {
                let info = self.t.binder(f);
                let expected = if info.even_antecedents {
                    Role::V
                } else {
                    Role::R
                };
                if q != expected {
                    return Err(GameError::RoleInconsistency {
                        formula: self.t.formula(f).to_string(),
                        expected,
                        found: q,
                    });
                }
                next = vec![at(v, *body, q)];
                fix_owner(*kind)
            }
            Node::Var { .. } => {
                let b = self
                    .t
                    .binder_of_var(f)
                    .expect("sentence variables are bound");
                let info = self.t.binder(b);
                let n = self.t.binders().len() as u32;
                let owned_by_i = matches!(
                    (info.kind, q),
                    (Fixpoint::Nu, Role::V) | (Fixpoint::Mu, Role::R)
                );
                let base = 2 * (n - info.rank as u32 - 1);
                self.arena.priority[i] = if owned_by_i { base + 2 } else { base + 1 };
                next = vec![at(v, b, q)];
                fix_owner(info.kind)
            }
        };
        self.arena.owner[i] = owner;
        let succ: Vec<usize> = next.into_iter().map(|p| self.intern(p)).collect();
        self.arena.moves[i] = succ;
        Ok(())
    }
}

fn fix_owner(kind: Fixpoint) -> Role {
    match kind {
        Fixpoint::Mu => Role::V,
        Fixpoint::Nu => Role::R,
    }
}

/// The game for `M, w ⊨ φ`, restricted to positions reachable from `⟨w, φ, V⟩`.
pub fn build_arena(m: &Model, s: &WellNamedSentence, w: usize) -> Result<GameArena, GameError> {
    build_from(m, s, &[w])
}

/// One arena holding the games at every world; `initial()[w]` starts at `w`.
pub fn build_arena_all(m: &Model, s: &WellNamedSentence) -> Result<GameArena, GameError> {
    let worlds: Vec<usize> = (0..m.len()).collect();
    build_from(m, s, &worlds)
}

fn build_from(m: &Model, s: &WellNamedSentence, roots: &[usize]) -> Result<GameArena, GameError> {
    let t = s.table();
    let mut b = Builder {
        m,
        t,
        arena: GameArena {
            worlds: m.worlds().to_vec(),
            formulas: t.ids().map(|id| t.formula(id).clone()).collect(),
            positions: Vec::new(),
            moves: Vec::new(),
            owner: Vec::new(),
            priority: Vec::new(),
            initial: Vec::new(),
        },
        index: HashMap::new(),
        queue: VecDeque::new(),
    };
    for &w in roots {
        let i = b.intern(Position {
            world: w,
            formula: t.root(),
            role_of_i: Role::V,
        });
        b.arena.initial.push(i);
    }
    while let Some(i) = b.queue.pop_front() {
        b.expand(i)?;
    }
    Ok(b.arena)
}
