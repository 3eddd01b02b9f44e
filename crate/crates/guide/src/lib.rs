//! The chapters of the book, one module each, so `cargo test` runs every
//! snippet as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/formulas.md")]
pub mod formulas {}
#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../../book/src/games.md")]
pub mod games {}
#[doc = include_str!("../../../book/src/proofs.md")]
pub mod proofs {}
#[doc = include_str!("../../../book/src/fuzzing.md")]
pub mod fuzzing {}
