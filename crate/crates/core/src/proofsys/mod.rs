//! Labelled sequent calculus: rules, saturation, cyclic proof search,
//! progress checking and countermodel extraction.

mod countermodel;
mod graph;
mod progress;
mod rules;
mod saturation;
mod search;
mod sequent;

pub use countermodel::{check_countermodel, extract_countermodel, read_model, ExtractError};
pub use graph::{
    back_steps, regen_priority, rule_steps, Premise, ProofError, ProofGraph, ProofNode, Step,
};
pub use progress::{check_progress, Lasso, Progress};
pub use rules::{apply_rule, find_axiom, minors, RuleError, RuleInstance, RuleName};
pub use saturation::{is_saturated, phase_of, Phase, Witness};
pub use search::{prove, Budget, Refutation, SearchReport, Verdict};
pub use sequent::{Label, LabelMap, LabeledFormula, Pos, RelAtom, Sequent, Side};
