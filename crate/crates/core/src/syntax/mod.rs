//! Formulas of the constructive modal μ-calculus.
//!
//! The parser produces only the user-facing connectives. [`Formula::LocalDia`]
//! and [`Formula::Query`] are internal: they show up as game positions and in
//! sequents, and can only be written with [`parse_internal`].

mod analysis;
mod parse;
mod print;
mod table;

pub use analysis::{analyze, closure, AnalysisError, WellNamedSentence};
pub use parse::{parse, parse_internal, ParseError};
pub use table::{FId, Fixpoint, FormulaTable, Node};

use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Prop(String),
    Var(String),
    Bottom,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
    Dia(Box<Formula>),
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
    /// Some R-successor of the current world satisfies the body.
    LocalDia(Box<Formula>),
    /// The implication-query position `ψ?θ` of the evaluation game.
    Query(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn prop(name: &str) -> Self {
        Formula::Prop(name.to_string())
    }

    pub fn var(name: &str) -> Self {
        Formula::Var(name.to_string())
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::implies(f, Formula::Bottom)
    }

    pub fn top() -> Self {
        Formula::implies(Formula::Bottom, Formula::Bottom)
    }

    pub fn boxed(f: Formula) -> Self {
        Formula::Box(Box::new(f))
    }

    pub fn dia(f: Formula) -> Self {
        Formula::Dia(Box::new(f))
    }

    pub fn local_dia(f: Formula) -> Self {
        Formula::LocalDia(Box::new(f))
    }

    pub fn query(l: Formula, r: Formula) -> Self {
        Formula::Query(Box::new(l), Box::new(r))
    }

    pub fn mu(x: &str, body: Formula) -> Self {
        Formula::Mu(x.to_string(), Box::new(body))
    }

    pub fn nu(x: &str, body: Formula) -> Self {
        Formula::Nu(x.to_string(), Box::new(body))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Prop(_) | Formula::Var(_) | Formula::Bottom => vec![],
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Query(l, r) => {
                vec![l, r]
            }
            Formula::Box(f) | Formula::Dia(f) | Formula::LocalDia(f) => vec![f],
            Formula::Mu(_, b) | Formula::Nu(_, b) => vec![b],
        }
    }

    pub fn is_fixpoint(&self) -> bool {
        matches!(self, Formula::Mu(..) | Formula::Nu(..))
    }

    /// The bound variable and body of a fixpoint formula.
    pub fn as_fixpoint(&self) -> Option<(Fixpoint, &str, &Formula)> {
        match self {
            Formula::Mu(x, b) => Some((Fixpoint::Mu, x, b)),
            Formula::Nu(x, b) => Some((Fixpoint::Nu, x, b)),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                Formula::Mu(x, b) | Formula::Nu(x, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                _ => {
                    for c in f.children() {
                        go(c, bound, out);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Prop(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Whether `LocalDia` or `Query` occurs anywhere.
    pub fn has_internal(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if matches!(f, Formula::LocalDia(_) | Formula::Query(..)) {
                found = true;
            }
        });
        found
    }

    /// Replaces free occurrences of `x` by `with` (no capture avoidance; callers
    /// substitute closed formulas).
    pub fn substitute(&self, x: &str, with: &Formula) -> Formula {
        let rec = |f: &Formula| Box::new(f.substitute(x, with));
        match self {
            Formula::Var(y) if y == x => with.clone(),
            Formula::Prop(_) | Formula::Var(_) | Formula::Bottom => self.clone(),
            Formula::And(l, r) => Formula::And(rec(l), rec(r)),
            Formula::Or(l, r) => Formula::Or(rec(l), rec(r)),
            Formula::Implies(l, r) => Formula::Implies(rec(l), rec(r)),
            Formula::Query(l, r) => Formula::Query(rec(l), rec(r)),
            Formula::Box(f) => Formula::Box(rec(f)),
            Formula::Dia(f) => Formula::Dia(rec(f)),
            Formula::LocalDia(f) => Formula::LocalDia(rec(f)),
            Formula::Mu(y, _) | Formula::Nu(y, _) if y == x => self.clone(),
            Formula::Mu(y, b) => Formula::Mu(y.clone(), rec(b)),
            Formula::Nu(y, b) => Formula::Nu(y.clone(), rec(b)),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// How a variable occurs in a formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
    /// Positive and negative at once; this includes formulas without any
    /// free occurrence.
    Both,
    /// Neither: the variable occurs both under an even and an odd number of
    /// antecedents.
    Mixed,
}

impl Polarity {
    fn from_flags(pos: bool, neg: bool) -> Self {
        match (pos, neg) {
            (true, true) => Polarity::Both,
            (true, false) => Polarity::Positive,
            (false, true) => Polarity::Negative,
            (false, false) => Polarity::Mixed,
        }
    }

    /// The side condition on fixpoint bodies.
    pub fn allows_fixpoint(self) -> bool {
        matches!(self, Polarity::Positive | Polarity::Both)
    }
}

/// Polarity of the free variable `x` in `f`, by structural induction.
pub fn polarity(f: &Formula, x: &str) -> Polarity {
    let (pos, neg) = polarity_flags(f, x);
    Polarity::from_flags(pos, neg)
}

fn polarity_flags(f: &Formula, x: &str) -> (bool, bool) {
    match f {
        Formula::Prop(_) | Formula::Bottom => (true, true),
        Formula::Var(y) => {
            if y == x {
                (true, false)
            } else {
                (true, true)
            }
        }
        Formula::And(l, r) | Formula::Or(l, r) => {
            let (lp, ln) = polarity_flags(l, x);
            let (rp, rn) = polarity_flags(r, x);
            (lp && rp, ln && rn)
        }
        Formula::Implies(l, r) | Formula::Query(l, r) => {
            let (lp, ln) = polarity_flags(l, x);
            let (rp, rn) = polarity_flags(r, x);
            (ln && rp, lp && rn)
        }
        Formula::Box(g) | Formula::Dia(g) | Formula::LocalDia(g) => polarity_flags(g, x),
        Formula::Mu(y, b) | Formula::Nu(y, b) => {
            if y == x {
                (true, true)
            } else {
                polarity_flags(b, x)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polarity_clauses() {
        assert_eq!(polarity(&Formula::prop("p"), "X"), Polarity::Both);
        assert_eq!(
            polarity(&Formula::not(Formula::var("X")), "X"),
            Polarity::Negative
        );
        assert_eq!(polarity(&Formula::var("X"), "X"), Polarity::Positive);
        let xx = Formula::implies(Formula::var("X"), Formula::var("X"));
        assert_eq!(polarity(&xx, "X"), Polarity::Mixed);
        let double = Formula::not(Formula::not(Formula::var("X")));
        assert_eq!(polarity(&double, "X"), Polarity::Positive);
        let shadow = Formula::mu("X", Formula::not(Formula::var("X")));
        assert_eq!(polarity(&shadow, "X"), Polarity::Both);
    }

    #[test]
    fn free_vars_respect_binders() {
        let f = Formula::and(
            Formula::var("Y"),
            Formula::mu("X", Formula::boxed(Formula::var("X"))),
        );
        assert_eq!(
            f.free_vars().into_iter().collect::<Vec<_>>(),
            vec!["Y".to_string()]
        );
    }
}
