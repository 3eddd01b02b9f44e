//! Truth sets `‖φ‖` over a finite model, with fixpoints by Kleene iteration.

use crate::model::{Env, Model};
use crate::syntax::Formula;
use crate::worldset::WorldSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("implication queries have no truth set")]
    QueryNotEvaluable,
    #[error("expected a fixpoint formula, got {0}")]
    NotAFixpoint(String),
    #[error("iteration for {0} did not stabilize; is the body positive?")]
    NotStabilized(String),
}

/// Which clause to use for `<>`. `Local` is a deliberately wrong variant
/// used to check that differential testing notices a broken evaluator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DiamondClause {
    #[default]
    Persistent,
    Local,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalOptions {
    pub diamond: DiamondClause,
}

struct Ctx<'m> {
    m: &'m Model,
    env: &'m Env,
    opts: EvalOptions,
    scope: Vec<(String, WorldSet)>,
}

impl Ctx<'_> {
    fn lookup(&self, x: &str) -> Result<WorldSet, EvalError> {
        if let Some((_, s)) = self.scope.iter().rev().find(|(y, _)| y == x) {
            return Ok(s.clone());
        }
        self.env
            .get(x)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVariable(x.to_string()))
    }

    fn eval(&mut self, f: &Formula) -> Result<WorldSet, EvalError> {
        let m = self.m;
        let n = m.len();
        Ok(match f {
            Formula::Prop(p) => m.val(p),
            Formula::Var(x) => self.lookup(x)?,
            Formula::Bottom => m.fallible().clone(),
            Formula::And(a, b) => self.eval(a)?.intersection(&self.eval(b)?),
            Formula::Or(a, b) => self.eval(a)?.union(&self.eval(b)?),
            Formula::Implies(a, b) => {
                let bad = self.eval(a)?.difference(&self.eval(b)?);
                WorldSet::from_iter_in(
                    n,
                    (0..n).filter(|&w| !m.pre().successors(w).intersects(&bad)),
                )
            }
            Formula::Box(a) => {
                let s = self.eval(a)?;
                WorldSet::from_iter_in(
                    n,
                    (0..n).filter(|&w| m.pre_rel().successors(w).is_subset(&s)),
                )
            }
            Formula::Dia(a) => {
                let s = self.eval(a)?;
                let local = local_dia(m, &s);
                match self.opts.diamond {
                    DiamondClause::Local => local,
                    DiamondClause::Persistent => WorldSet::from_iter_in(
                        n,
                        (0..n).filter(|&w| m.pre().successors(w).is_subset(&local)),
                    ),
                }
            }
            Formula::LocalDia(a) => {
                let s = self.eval(a)?;
                local_dia(m, &s)
            }
            Formula::Query(..) => return Err(EvalError::QueryNotEvaluable),
            Formula::Mu(x, body) | Formula::Nu(x, body) => {
                let start = if matches!(f, Formula::Mu(..)) {
                    WorldSet::empty(n)
                } else {
                    m.all()
                };
                self.iterate(x, body, start, None, f)?
            }
        })
    }

    fn step(&mut self, x: &str, body: &Formula, current: WorldSet) -> Result<WorldSet, EvalError> {
        self.scope.push((x.to_string(), current));
        let next = self.eval(body);
        self.scope.pop();
        next
    }

    /// Iterates from `start`; with `steps = None` until stable.
    fn iterate(
        &mut self,
        x: &str,
        body: &Formula,
        start: WorldSet,
        steps: Option<usize>,
        whole: &Formula,
    ) -> Result<WorldSet, EvalError> {
        let mut current = start;
        match steps {
            Some(k) => {
                for _ in 0..k {
                    current = self.step(x, body, current)?;
                }
                Ok(current)
            }
            None => {
                for _ in 0..=self.m.len() + 1 {
                    let next = self.step(x, body, current.clone())?;
                    if next == current {
                        return Ok(current);
                    }
                    current = next;
                }
                Err(EvalError::NotStabilized(whole.to_string()))
            }
        }
    }
}

fn local_dia(m: &Model, s: &WorldSet) -> WorldSet {
    let n = m.len();
    WorldSet::from_iter_in(n, (0..n).filter(|&w| m.rel().successors(w).intersects(s)))
}

/// `‖f‖` under `env`, which must cover every free variable.
pub fn eval(m: &Model, f: &Formula, env: &Env) -> Result<WorldSet, EvalError> {
    eval_with(m, f, env, EvalOptions::default())
}

pub fn eval_with(
    m: &Model,
    f: &Formula,
    env: &Env,
    opts: EvalOptions,
) -> Result<WorldSet, EvalError> {
    Ctx {
        m,
        env,
        opts,
        scope: Vec::new(),
    }
    .eval(f)
}

/// The `alpha`-th approximant of a fixpoint formula: `alpha` applications of
/// its operator starting from `∅` (μ) or `W` (ν).
pub fn approximant(
    m: &Model,
    binder: &Formula,
    alpha: usize,
    env: &Env,
) -> Result<WorldSet, EvalError> {
    let (_, x, body) = binder
        .as_fixpoint()
        .ok_or_else(|| EvalError::NotAFixpoint(binder.to_string()))?;
    let start = if matches!(binder, Formula::Mu(..)) {
        WorldSet::empty(m.len())
    } else {
        m.all()
    };
    let mut ctx = Ctx {
        m,
        env,
        opts: EvalOptions::default(),
        scope: Vec::new(),
    };
    ctx.iterate(x, body, start, Some(alpha), binder)
}

/// One application of the operator `A ↦ ‖body‖[X ↦ A]` of a fixpoint formula.
pub fn operator_gamma(
    m: &Model,
    binder: &Formula,
    env: &Env,
    a: &WorldSet,
) -> Result<WorldSet, EvalError> {
    let (_, x, body) = binder
        .as_fixpoint()
        .ok_or_else(|| EvalError::NotAFixpoint(binder.to_string()))?;
    eval(m, body, &env.clone().with(x, a.clone()))
}
