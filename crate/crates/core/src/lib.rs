//! Workbench for the constructive modal μ-calculus over birelational models.

pub mod denotational;
pub mod fuzz;
pub mod game;
pub mod model;
pub mod proofsys;
pub mod syntax;
pub mod worldset;

pub use model::{LogicVariant, Model};
pub use syntax::{analyze, parse, Formula, WellNamedSentence};
pub use worldset::WorldSet;
