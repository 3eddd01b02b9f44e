//! Evaluation games as finite max-parity games.

mod arena;
mod verify;
mod zielonka;

pub use arena::{build_arena, build_arena_all, load_arena, GameArena, GameError, Position};
pub use verify::verify_strategy;
pub use zielonka::{solve, solve_parity, ParityGame, Solution};

use crate::model::{Env, Model};
use crate::syntax::WellNamedSentence;
use std::collections::BTreeMap;
use std::fmt;

/// Verifier or Refuter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    V,
    R,
}

impl Role {
    pub fn flip(self) -> Role {
        match self {
            Role::V => Role::R,
            Role::R => Role::V,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::V => "V",
            Role::R => "R",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    I,
    II,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::I => Player::II,
            Player::II => Player::I,
        }
    }

    /// The player favoured by a priority under the max-parity condition.
    pub fn of_priority(p: u32) -> Player {
        if p % 2 == 0 {
            Player::I
        } else {
            Player::II
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::I => "I",
            Player::II => "II",
        })
    }
}

/// A positional strategy: chosen successor per owned position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Strategy {
    pub choice: BTreeMap<usize, usize>,
}

impl Strategy {
    pub fn get(&self, pos: usize) -> Option<usize> {
        self.choice.get(&pos).copied()
    }
}

/// Whether membership in the truth set and the game winner agree at `w`.
pub fn check_equivalence(m: &Model, s: &WellNamedSentence, w: usize) -> Result<bool, GameError> {
    let truth = crate::denotational::eval(m, s.formula(), &Env::new())
        .map_err(|e| GameError::Eval(e.to_string()))?
        .contains(w);
    let arena = build_arena(m, s, w)?;
    let sol = solve(&arena);
    Ok(truth == (sol.winner[arena.initial()[0]] == Player::I))
}
