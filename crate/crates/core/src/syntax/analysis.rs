use super::table::FormulaTable;
use super::{polarity, Formula};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("not a sentence: free variables {0:?}")]
    NotASentence(Vec<String>),
    #[error("variable {0} occurs outside the scope of a modality")]
    UnguardedVariable(String),
    #[error("variable {0} does not occur positively in its binder")]
    NonPositiveVariable(String),
    #[error("variable {0} occurs more than once in its binder")]
    MultipleOccurrences(String),
    #[error("implication queries cannot appear in input formulas")]
    InternalConnective,
}

/// A guarded, well-bounded sentence with unique binder names.
#[derive(Clone, Debug)]
pub struct WellNamedSentence {
    formula: Formula,
    binders: BTreeMap<String, Formula>,
    subsumption_order: Vec<Formula>,
    table: Arc<FormulaTable>,
}

impl WellNamedSentence {
    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    /// Bound variable to its binding fixpoint subformula.
    pub fn binders(&self) -> &BTreeMap<String, Formula> {
        &self.binders
    }

    /// Fixpoint subformulas in non-increasing size.
    pub fn subsumption_order(&self) -> &[Formula] {
        &self.subsumption_order
    }

    /// The interned closure.
    pub fn table(&self) -> &Arc<FormulaTable> {
        &self.table
    }
}

impl PartialEq for WellNamedSentence {
    fn eq(&self, other: &Self) -> bool {
        self.formula == other.formula
    }
}

impl Eq for WellNamedSentence {}

fn all_var_names(f: &Formula) -> HashSet<String> {
    let mut out = HashSet::new();
    f.visit(&mut |g| match g {
        Formula::Var(x) | Formula::Mu(x, _) | Formula::Nu(x, _) => {
            out.insert(x.clone());
        }
        _ => {}
    });
    out
}

struct Renamer {
    taken: HashSet<String>,
    used_binders: HashSet<String>,
    original: HashMap<String, String>,
}

impl Renamer {
    fn fresh(&mut self, base: &str) -> String {
        if !self.used_binders.contains(base) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}{i}"))
            .find(|c| !self.taken.contains(c))
            .expect("unbounded supply")
    }

    fn rename(&mut self, f: &Formula, scope: &mut Vec<(String, String)>) -> Formula {
        let rec = |me: &mut Self, g: &Formula, scope: &mut Vec<(String, String)>| {
            Box::new(me.rename(g, scope))
        };
        match f {
            Formula::Var(x) => {
                let renamed = scope
                    .iter()
                    .rev()
                    .find(|(o, _)| o == x)
                    .map(|(_, n)| n.clone());
                Formula::Var(renamed.unwrap_or_else(|| x.clone()))
            }
            Formula::Prop(_) | Formula::Bottom => f.clone(),
            Formula::And(l, r) => Formula::And(rec(self, l, scope), rec(self, r, scope)),
            Formula::Or(l, r) => Formula::Or(rec(self, l, scope), rec(self, r, scope)),
            Formula::Implies(l, r) => Formula::Implies(rec(self, l, scope), rec(self, r, scope)),
            Formula::Query(l, r) => Formula::Query(rec(self, l, scope), rec(self, r, scope)),
            Formula::Box(g) => Formula::Box(rec(self, g, scope)),
            Formula::Dia(g) => Formula::Dia(rec(self, g, scope)),
            Formula::LocalDia(g) => Formula::LocalDia(rec(self, g, scope)),
            Formula::Mu(x, b) | Formula::Nu(x, b) => {
                let name = self.fresh(x);
                self.used_binders.insert(name.clone());
                self.taken.insert(name.clone());
                self.original.insert(name.clone(), x.clone());
                scope.push((x.clone(), name.clone()));
                let body = rec(self, b, scope);
                scope.pop();
                if matches!(f, Formula::Mu(..)) {
                    Formula::Mu(name, body)
                } else {
                    Formula::Nu(name, body)
                }
            }
        }
    }
}

fn count_occurrences(f: &Formula, x: &str) -> usize {
    let mut n = 0;
    f.visit(&mut |g| {
        if matches!(g, Formula::Var(y) if y == x) {
            n += 1;
        }
    });
    n
}

/// Whether every occurrence of `x` in `f` sits under a modality.
fn guarded(f: &Formula, x: &str) -> bool {
    match f {
        Formula::Var(y) => y != x,
        Formula::Box(_) | Formula::Dia(_) | Formula::LocalDia(_) => true,
        _ => f.children().into_iter().all(|c| guarded(c, x)),
    }
}

fn fixpoints_preorder(f: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    f.visit(&mut |g| {
        if g.is_fixpoint() {
            out.push(g.clone());
        }
    });
    out
}

/// Renames binders apart and checks positivity, single occurrence and
/// guardedness at every binder.
pub fn analyze(f: &Formula) -> Result<WellNamedSentence, AnalysisError> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(AnalysisError::NotASentence(free.into_iter().collect()));
    }
    let mut has_query = false;
    f.visit(&mut |g| has_query |= matches!(g, Formula::Query(..)));
    if has_query {
        return Err(AnalysisError::InternalConnective);
    }
    let mut renamer = Renamer {
        taken: all_var_names(f),
        used_binders: HashSet::new(),
        original: HashMap::new(),
    };
    let formula = renamer.rename(f, &mut Vec::new());
    let fixpoints = fixpoints_preorder(&formula);
    for fix in &fixpoints {
        let (_, x, body) = fix.as_fixpoint().expect("fixpoint");
        let orig = renamer.original[x].clone();
        if !polarity(body, x).allows_fixpoint() {
            return Err(AnalysisError::NonPositiveVariable(orig));
        }
        if count_occurrences(body, x) > 1 {
            return Err(AnalysisError::MultipleOccurrences(orig));
        }
        if !guarded(body, x) {
            return Err(AnalysisError::UnguardedVariable(orig));
        }
    }
    let binders = fixpoints
        .iter()
        .map(|g| (g.as_fixpoint().expect("fixpoint").1.to_string(), g.clone()))
        .collect();
    // stable sort keeps pre-order among equal sizes, so outer binders come first
    let mut order = fixpoints.clone();
    order.sort_by_key(|g| std::cmp::Reverse(g.size()));
    let table = Arc::new(FormulaTable::build(&formula, &order));
    Ok(WellNamedSentence {
        formula,
        binders,
        subsumption_order: order,
        table,
    })
}

/// Subformulas plus `<^>ψ` for each `<>ψ` and `ψ ? θ` for each `ψ -> θ`.
pub fn closure(s: &WellNamedSentence) -> BTreeSet<Formula> {
    s.table
        .ids()
        .map(|id| s.table.formula(id).clone())
        .collect()
}
