use super::rules::{RuleInstance, RuleName};
use super::sequent::{Label, LabeledFormula, RelAtom, Sequent, Side};
use crate::model::LogicVariant;
use crate::syntax::{FormulaTable, Node};
use std::fmt;

/// An unsatisfied saturation clause, with the rule instance that repairs it.
///
/// Clauses 1 to 18 are the base saturation conditions (clause 2, transitivity of
/// `R`, is never reported). Clauses 19 to 22 cover the extra rules: `⊥`
/// along `R`, forward and backward confluence, and linearity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub clause: u8,
    pub repair: RuleInstance,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause {} ({})", self.clause, self.repair.name)?;
        if let Some(p) = self.repair.principal {
            write!(f, " at {}", p.label)?;
        }
        for a in &self.repair.atoms {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    /// Single premise, no new labels.
    Cheap,
    Branching,
    /// Introduces eigenvariables.
    Generating,
}

pub fn phase_of(clause: u8) -> Phase {
    match clause {
        5 | 6 | 8 | 22 => Phase::Branching,
        9 | 11 | 12 | 13 | 20 | 21 => Phase::Generating,
        _ => Phase::Cheap,
    }
}

/// Every unsatisfied clause of `s`.
pub fn is_saturated(s: &Sequent, t: &FormulaTable, variant: LogicVariant) -> Vec<Witness> {
    let mut out = Vec::new();
    for phase in [Phase::Cheap, Phase::Branching, Phase::Generating] {
        scan(s, t, variant, phase, &mut |w| {
            out.push(w);
            false
        });
    }
    out
}

pub(crate) fn first_in_phase(
    s: &Sequent,
    t: &FormulaTable,
    variant: LogicVariant,
    phase: Phase,
) -> Option<Witness> {
    let mut found = None;
    scan(s, t, variant, phase, &mut |w| {
        found = Some(w);
        true
    });
    found
}

/// The generating witness with the oldest principal label.
pub(crate) fn oldest_generating(
    s: &Sequent,
    t: &FormulaTable,
    variant: LogicVariant,
) -> Option<Witness> {
    let mut best: Option<(Label, Witness)> = None;
    scan(s, t, variant, Phase::Generating, &mut |w| {
        let key = w
            .repair
            .principal
            .map(|p| p.label)
            .unwrap_or_else(|| w.repair.atoms[0].labels()[0]);
        if best.as_ref().map_or(true, |(k, _)| key < *k) {
            best = Some((key, w));
        }
        key.0 == 0
    });
    best.map(|(_, w)| w)
}

/// Feeds witnesses of one phase to `f` until it returns true.
fn scan(
    s: &Sequent,
    t: &FormulaTable,
    variant: LogicVariant,
    phase: Phase,
    f: &mut dyn FnMut(Witness) -> bool,
) {
    let next = s.max_label().map_or(0, |l| l.0 + 1);
    let fresh1 = [Label(next)];
    let fresh2 = [Label(next), Label(next + 1)];
    let up = |x: Label| std::iter::once(x).chain(s.pre_succ(x));
    let ik = variant != LogicVariant::CK;
    let mut emit = |clause: u8, repair: RuleInstance| -> bool { f(Witness { clause, repair }) };
    match phase {
        Phase::Cheap => {
            for (x, y) in s.pre_atoms() {
                for z in s.pre_succ(y) {
                    if x != z
                        && !s.rel.contains(&RelAtom::Pre(x, z))
                        && emit(
                            1,
                            RuleInstance::new(RuleName::PreTrans, None)
                                .with_atoms([RelAtom::Pre(x, y), RelAtom::Pre(y, z)]),
                        )
                    {
                        return;
                    }
                }
            }
            for (x, y) in s.pre_atoms() {
                for phi in s.at(Side::Left, x) {
                    if !s.has(Side::Left, y, phi)
                        && emit(
                            3,
                            RuleInstance::new(RuleName::PrePres, Some(LabeledFormula::new(x, phi)))
                                .with_atoms([RelAtom::Pre(x, y)]),
                        )
                    {
                        return;
                    }
                }
            }
            for lf in s.left.iter().copied() {
                let x = lf.label;
                let hit = match *t.node(lf.formula) {
                    Node::Bottom if !ik => s
                        .acc_succ(x)
                        .find(|&y| !s.has(Side::Left, y, lf.formula))
                        .map(|y| {
                            (
                                19,
                                RuleInstance::new(RuleName::BotRel, Some(lf))
                                    .with_atoms([RelAtom::Acc(x, y)]),
                            )
                        }),
                    Node::And(a, b) if !s.has(Side::Left, x, a) || !s.has(Side::Left, x, b) => {
                        Some((4, RuleInstance::new(RuleName::AndL, Some(lf))))
                    }
                    Node::Fix { body, .. } if !s.has(Side::Left, x, body) => {
                        Some((15, RuleInstance::new(RuleName::FixL, Some(lf))))
                    }
                    Node::Var { binder, .. } if !s.has(Side::Left, x, binder) => {
                        Some((17, RuleInstance::new(RuleName::RegenL, Some(lf))))
                    }
                    Node::Box(a) if s.acc_succ(x).any(|y| !s.has(Side::Left, y, a)) => {
                        Some((10, RuleInstance::new(RuleName::BoxL, Some(lf))))
                    }
                    _ => None,
                };
                if let Some((c, r)) = hit {
                    if emit(c, r) {
                        return;
                    }
                }
            }
            for lf in s.right.iter().copied() {
                let x = lf.label;
                let hit = match *t.node(lf.formula) {
                    Node::Or(a, b) if !s.has(Side::Right, x, a) || !s.has(Side::Right, x, b) => {
                        Some((7, RuleInstance::new(RuleName::OrR, Some(lf))))
                    }
                    Node::Fix { body, .. } if !s.has(Side::Right, x, body) => {
                        Some((16, RuleInstance::new(RuleName::FixR, Some(lf))))
                    }
                    Node::Var { binder, .. } if !s.has(Side::Right, x, binder) => {
                        Some((18, RuleInstance::new(RuleName::RegenR, Some(lf))))
                    }
                    Node::LocalDia(a) if s.acc_succ(x).any(|y| !s.has(Side::Right, y, a)) => {
                        Some((14, RuleInstance::new(RuleName::LocalDiaR, Some(lf))))
                    }
                    _ => None,
                };
                if let Some((c, r)) = hit {
                    if emit(c, r) {
                        return;
                    }
                }
            }
        }
        Phase::Branching => {
            for lf in s.left.iter().copied() {
                let x = lf.label;
                let hit = match *t.node(lf.formula) {
                    Node::Or(a, b) if !s.has(Side::Left, x, a) && !s.has(Side::Left, x, b) => {
                        Some((6, RuleName::OrL))
                    }
                    Node::Implies(a, b)
                        if !s.has(Side::Right, x, a) && !s.has(Side::Left, x, b) =>
                    {
                        Some((8, RuleName::ImpL))
                    }
                    _ => None,
                };
                if let Some((c, r)) = hit {
                    if emit(c, RuleInstance::new(r, Some(lf))) {
                        return;
                    }
                }
            }
            for lf in s.right.iter().copied() {
                let x = lf.label;
                if let Node::And(a, b) = *t.node(lf.formula) {
                    if !s.has(Side::Right, x, a)
                        && !s.has(Side::Right, x, b)
                        && emit(5, RuleInstance::new(RuleName::AndR, Some(lf)))
                    {
                        return;
                    }
                }
            }
            if variant == LogicVariant::GK {
                for (x, y) in s.pre_atoms() {
                    for z in s.pre_succ(x) {
                        if y < z
                            && !s.rel.contains(&RelAtom::Pre(y, z))
                            && !s.rel.contains(&RelAtom::Pre(z, y))
                            && emit(
                                22,
                                RuleInstance::new(RuleName::Lin, None)
                                    .with_atoms([RelAtom::Pre(x, y), RelAtom::Pre(x, z)]),
                            )
                        {
                            return;
                        }
                    }
                }
            }
        }
        Phase::Generating => {
            for lf in s.left.iter().copied() {
                let x = lf.label;
                if let Node::Dia(a) = *t.node(lf.formula) {
                    if !s.acc_succ(x).any(|y| s.has(Side::Left, y, a))
                        && emit(
                            12,
                            RuleInstance::new(RuleName::DiaL, Some(lf)).with_fresh(fresh1),
                        )
                    {
                        return;
                    }
                }
            }
            for lf in s.right.iter().copied() {
                let x = lf.label;
                let hit = match *t.node(lf.formula) {
                    Node::Implies(a, b)
                        if !up(x).any(|y| s.has(Side::Left, y, a) && s.has(Side::Right, y, b)) =>
                    {
                        Some((
                            9,
                            RuleInstance::new(RuleName::ImpR, Some(lf)).with_fresh(fresh1),
                        ))
                    }
                    Node::Box(a)
                        if !up(x).any(|y| s.acc_succ(y).any(|z| s.has(Side::Right, z, a))) =>
                    {
                        Some((
                            11,
                            RuleInstance::new(RuleName::BoxR, Some(lf)).with_fresh(fresh2),
                        ))
                    }
                    Node::Dia(_) => {
                        let ld = t.local_dia_of(lf.formula);
                        (!up(x).any(|y| s.has(Side::Right, y, ld))).then(|| {
                            (
                                13,
                                RuleInstance::new(RuleName::DiaR, Some(lf)).with_fresh(fresh1),
                            )
                        })
                    }
                    _ => None,
                };
                if let Some((c, r)) = hit {
                    if emit(c, r) {
                        return;
                    }
                }
            }
            if ik {
                for (x, x2) in s.pre_atoms() {
                    for y in s.acc_succ(x) {
                        if !s.acc_succ(x2).any(|y2| s.pre_refl(y, y2))
                            && emit(
                                20,
                                RuleInstance::new(RuleName::Fwd, None)
                                    .with_atoms([RelAtom::Pre(x, x2), RelAtom::Acc(x, y)])
                                    .with_fresh(fresh1),
                            )
                        {
                            return;
                        }
                    }
                }
                for (x, y) in s.acc_atoms() {
                    for y2 in s.pre_succ(y) {
                        if !up(x).any(|x2| s.acc(x2, y2))
                            && emit(
                                21,
                                RuleInstance::new(RuleName::Bwd, None)
                                    .with_atoms([RelAtom::Acc(x, y), RelAtom::Pre(y, y2)])
                                    .with_fresh(fresh1),
                            )
                        {
                            return;
                        }
                    }
                }
            }
        }
    }
}
