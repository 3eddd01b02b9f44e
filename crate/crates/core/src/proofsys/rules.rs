use super::sequent::{Label, LabeledFormula, Pos, RelAtom, Sequent, Side};
use crate::model::LogicVariant;
use crate::syntax::{FId, FormulaTable, Node};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleName {
    BotL,
    Id,
    IdDiaN,
    PrePres,
    PreTrans,
    BotRel,
    AndL,
    AndR,
    OrL,
    OrR,
    ImpL,
    ImpR,
    BoxL,
    BoxR,
    DiaL,
    DiaR,
    LocalDiaR,
    FixL,
    FixR,
    RegenL,
    RegenR,
    Fwd,
    Bwd,
    Lin,
    Wk,
}

const NAMES: [(RuleName, &str); 25] = [
    (RuleName::BotL, "bot-l"),
    (RuleName::Id, "id"),
    (RuleName::IdDiaN, "id-dia-n"),
    (RuleName::PrePres, "pre-pres"),
    (RuleName::PreTrans, "pre-trans"),
    (RuleName::BotRel, "bot-rel"),
    (RuleName::AndL, "and-l"),
    (RuleName::AndR, "and-r"),
    (RuleName::OrL, "or-l"),
    (RuleName::OrR, "or-r"),
    (RuleName::ImpL, "imp-l"),
    (RuleName::ImpR, "imp-r"),
    (RuleName::BoxL, "box-l"),
    (RuleName::BoxR, "box-r"),
    (RuleName::DiaL, "dia-l"),
    (RuleName::DiaR, "dia-r"),
    (RuleName::LocalDiaR, "ldia-r"),
    (RuleName::FixL, "fix-l"),
    (RuleName::FixR, "fix-r"),
    (RuleName::RegenL, "regen-l"),
    (RuleName::RegenR, "regen-r"),
    (RuleName::Fwd, "fwd"),
    (RuleName::Bwd, "bwd"),
    (RuleName::Lin, "lin"),
    (RuleName::Wk, "wk"),
];

impl RuleName {
    pub fn as_str(self) -> &'static str {
        NAMES
            .iter()
            .find(|(r, _)| *r == self)
            .map(|(_, s)| *s)
            .expect("every rule is named")
    }

    pub fn is_axiom(self) -> bool {
        matches!(self, RuleName::BotL | RuleName::Id | RuleName::IdDiaN)
    }

    /// The side of the principal labelled formula, if the rule has one.
    pub fn principal_side(self) -> Option<Side> {
        use RuleName::*;
        match self {
            IdDiaN | PrePres | BotRel | AndL | OrL | ImpL | BoxL | DiaL | FixL | RegenL => {
                Some(Side::Left)
            }
            BotL | Id | AndR | OrR | ImpR | BoxR | DiaR | LocalDiaR | FixR | RegenR => {
                Some(Side::Right)
            }
            PreTrans | Fwd | Bwd | Lin | Wk => None,
        }
    }

    pub fn variants(self) -> &'static [LogicVariant] {
        use LogicVariant::*;
        match self {
            RuleName::IdDiaN | RuleName::Fwd | RuleName::Bwd => &[IK, GK],
            RuleName::Lin => &[GK],
            _ => &LogicVariant::ALL,
        }
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        NAMES
            .iter()
            .find(|(_, n)| *n == s)
            .map(|(r, _)| *r)
            .ok_or_else(|| format!("unknown rule {s:?}"))
    }
}

/// One application of a rule. Premises are determined by the conclusion and
/// these fields.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RuleInstance {
    pub name: RuleName,
    pub principal: Option<LabeledFormula>,
    /// Relational premises, in the order the rule lists them.
    pub atoms: Vec<RelAtom>,
    pub fresh: Vec<Label>,
    /// The premise of `wk`.
    pub keep: Option<Box<Sequent>>,
}

impl RuleInstance {
    pub fn new(name: RuleName, principal: Option<LabeledFormula>) -> Self {
        RuleInstance {
            name,
            principal,
            atoms: Vec::new(),
            fresh: Vec::new(),
            keep: None,
        }
    }

    pub fn with_atoms(mut self, atoms: impl IntoIterator<Item = RelAtom>) -> Self {
        self.atoms = atoms.into_iter().collect();
        self
    }

    pub fn with_fresh(mut self, fresh: impl IntoIterator<Item = Label>) -> Self {
        self.fresh = fresh.into_iter().collect();
        self
    }

    pub fn weakening(keep: Sequent) -> Self {
        RuleInstance {
            keep: Some(Box::new(keep)),
            ..RuleInstance::new(RuleName::Wk, None)
        }
    }

    pub fn principal_pos(&self) -> Option<Pos> {
        Some(Pos {
            side: self.name.principal_side()?,
            lf: self.principal?,
        })
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("principal formula of {0} is missing or has the wrong shape")]
    PrincipalMissing(RuleName),
    #[error("relational premise {1} of {0} is missing")]
    AtomMissing(RuleName, RelAtom),
    #[error("eigenvariable {1} of {0} is not fresh")]
    FreshnessViolation(RuleName, Label),
    #[error("rule {0} is not available in {1}")]
    RuleNotInVariant(RuleName, LogicVariant),
    #[error("malformed instance of {0}: {1}")]
    Malformed(RuleName, String),
}

fn shape(r: &RuleInstance, atoms: usize, fresh: usize) -> Result<(), RuleError> {
    if r.atoms.len() != atoms || r.fresh.len() != fresh {
        return Err(RuleError::Malformed(
            r.name,
            format!("expected {atoms} relational premise(s) and {fresh} eigenvariable(s)"),
        ));
    }
    Ok(())
}

fn pre(a: RelAtom) -> Option<(Label, Label)> {
    match a {
        RelAtom::Pre(x, y) => Some((x, y)),
        RelAtom::Acc(..) => None,
    }
}

fn acc(a: RelAtom) -> Option<(Label, Label)> {
    match a {
        RelAtom::Acc(x, y) => Some((x, y)),
        RelAtom::Pre(..) => None,
    }
}

/// Applies a rule instance, returning its premises in order. Axioms have none.
pub fn apply_rule(
    s: &Sequent,
    r: &RuleInstance,
    t: &FormulaTable,
    variant: LogicVariant,
) -> Result<Vec<Sequent>, RuleError> {
    use RuleName::*;
    if !r.name.variants().contains(&variant) {
        return Err(RuleError::RuleNotInVariant(r.name, variant));
    }
    for a in &r.atoms {
        if !s.rel.contains(a) {
            return Err(RuleError::AtomMissing(r.name, *a));
        }
    }
    let labels = s.labels();
    for (i, y) in r.fresh.iter().enumerate() {
        if labels.contains(y) || r.fresh[..i].contains(y) {
            return Err(RuleError::FreshnessViolation(r.name, *y));
        }
    }
    let missing = || RuleError::PrincipalMissing(r.name);
    let bad_atom = |what: &str| RuleError::Malformed(r.name, format!("expected {what}"));
    let (x, node) = match (r.principal, r.name.principal_side()) {
        (Some(p), Some(side)) => {
            if !s.side(side).contains(&p) {
                return Err(missing());
            }
            (p.label, Some(t.node(p.formula)))
        }
        (None, None) => (Label(0), None),
        _ => return Err(missing()),
    };
    let add = |mut s: Sequent, side: Side, y: Label, f: FId| {
        s.side_mut(side).insert(LabeledFormula::new(y, f));
        s
    };
    let link = |mut s: Sequent, atoms: &[RelAtom]| {
        for a in atoms {
            s.rel.insert(*a);
        }
        s
    };
    let out = match (r.name, node) {
        (Id, Some(Node::Prop(_))) => {
            shape(r, 0, 0)?;
            if !s.has(Side::Left, x, r.principal.unwrap().formula) {
                return Err(missing());
            }
            vec![]
        }
        (BotL, Some(Node::Prop(_) | Node::Bottom)) => {
            shape(r, 0, 0)?;
            let bot = t.id(&crate::syntax::Formula::Bottom).ok_or_else(missing)?;
            if !s.has(Side::Left, x, bot) {
                return Err(missing());
            }
            vec![]
        }
        (IdDiaN, Some(Node::Bottom)) => {
            shape(r, 0, 0)?;
            vec![]
        }
        (PreTrans, None) => {
            shape(r, 2, 0)?;
            let (a, b) = pre(r.atoms[0]).ok_or_else(|| bad_atom("x<=y"))?;
            let (b2, c) = pre(r.atoms[1]).ok_or_else(|| bad_atom("y<=z"))?;
            if b != b2 {
                return Err(bad_atom("atoms sharing the middle variable"));
            }
            vec![link(s.clone(), &[RelAtom::Pre(a, c)])]
        }
        (PrePres, Some(_)) => {
            shape(r, 1, 0)?;
            let (a, b) = pre(r.atoms[0]).ok_or_else(|| bad_atom("x<=y"))?;
            if a != x {
                return Err(bad_atom("an atom starting at the principal label"));
            }
            vec![add(s.clone(), Side::Left, b, r.principal.unwrap().formula)]
        }
        (BotRel, Some(Node::Bottom)) => {
            shape(r, 1, 0)?;
            let (a, b) = acc(r.atoms[0]).ok_or_else(|| bad_atom("x R y"))?;
            if a != x {
                return Err(bad_atom("an atom starting at the principal label"));
            }
            vec![add(s.clone(), Side::Left, b, r.principal.unwrap().formula)]
        }
        (AndL, Some(&Node::And(a, b))) => {
            shape(r, 0, 0)?;
            vec![add(add(s.clone(), Side::Left, x, a), Side::Left, x, b)]
        }
        (AndR, Some(&Node::And(a, b))) => {
            shape(r, 0, 0)?;
            vec![
                add(s.clone(), Side::Right, x, a),
                add(s.clone(), Side::Right, x, b),
            ]
        }
        (OrL, Some(&Node::Or(a, b))) => {
            shape(r, 0, 0)?;
            vec![
                add(s.clone(), Side::Left, x, a),
                add(s.clone(), Side::Left, x, b),
            ]
        }
        (OrR, Some(&Node::Or(a, b))) => {
            shape(r, 0, 0)?;
            vec![add(add(s.clone(), Side::Right, x, a), Side::Right, x, b)]
        }
        (ImpL, Some(&Node::Implies(a, b))) => {
            shape(r, 0, 0)?;
            vec![
                add(s.clone(), Side::Right, x, a),
                add(s.clone(), Side::Left, x, b),
            ]
        }
        (ImpR, Some(&Node::Implies(a, b))) => {
            shape(r, 0, 1)?;
            let y = r.fresh[0];
            let s = link(s.clone(), &[RelAtom::Pre(x, y)]);
            vec![add(add(s, Side::Left, y, a), Side::Right, y, b)]
        }
        (BoxL, Some(&Node::Box(a))) => {
            shape(r, 0, 0)?;
            let mut p = s.clone();
            for y in s.acc_succ(x) {
                p.left.insert(LabeledFormula::new(y, a));
            }
            vec![p]
        }
        (BoxR, Some(&Node::Box(a))) => {
            shape(r, 0, 2)?;
            let (y, z) = (r.fresh[0], r.fresh[1]);
            let s = link(s.clone(), &[RelAtom::Pre(x, y), RelAtom::Acc(y, z)]);
            vec![add(s, Side::Right, z, a)]
        }
        (DiaL, Some(&Node::Dia(a))) => {
            shape(r, 0, 1)?;
            let y = r.fresh[0];
            vec![add(
                link(s.clone(), &[RelAtom::Acc(x, y)]),
                Side::Left,
                y,
                a,
            )]
        }
        (DiaR, Some(Node::Dia(_))) => {
            shape(r, 0, 1)?;
            let y = r.fresh[0];
            let ld = t.local_dia_of(r.principal.unwrap().formula);
            vec![add(
                link(s.clone(), &[RelAtom::Pre(x, y)]),
                Side::Right,
                y,
                ld,
            )]
        }
        (LocalDiaR, Some(&Node::LocalDia(a))) => {
            shape(r, 0, 0)?;
            let mut p = s.clone();
            for y in s.acc_succ(x) {
                p.right.insert(LabeledFormula::new(y, a));
            }
            vec![p]
        }
        (FixL, Some(&Node::Fix { body, .. })) => {
            shape(r, 0, 0)?;
            vec![add(s.clone(), Side::Left, x, body)]
        }
        (FixR, Some(&Node::Fix { body, .. })) => {
            shape(r, 0, 0)?;
            vec![add(s.clone(), Side::Right, x, body)]
        }
        (RegenL, Some(&Node::Var { binder, .. })) => {
            shape(r, 0, 0)?;
            vec![add(s.clone(), Side::Left, x, binder)]
        }
        (RegenR, Some(&Node::Var { binder, .. })) => {
            shape(r, 0, 0)?;
            vec![add(s.clone(), Side::Right, x, binder)]
        }
        (Fwd, None) => {
            shape(r, 2, 1)?;
            let (a, a2) = pre(r.atoms[0]).ok_or_else(|| bad_atom("x<=x'"))?;
            let (a3, b) = acc(r.atoms[1]).ok_or_else(|| bad_atom("x R y"))?;
            if a != a3 {
                return Err(bad_atom("atoms sharing their source"));
            }
            let y2 = r.fresh[0];
            vec![link(
                s.clone(),
                &[RelAtom::Acc(a2, y2), RelAtom::Pre(b, y2)],
            )]
        }
        (Bwd, None) => {
            shape(r, 2, 1)?;
            let (a, b) = acc(r.atoms[0]).ok_or_else(|| bad_atom("x R y"))?;
            let (b2, b3) = pre(r.atoms[1]).ok_or_else(|| bad_atom("y<=y'"))?;
            if b != b2 {
                return Err(bad_atom("atoms sharing the middle variable"));
            }
            let a2 = r.fresh[0];
            vec![link(
                s.clone(),
                &[RelAtom::Pre(a, a2), RelAtom::Acc(a2, b3)],
            )]
        }
        (Lin, None) => {
            shape(r, 2, 0)?;
            let (a, b) = pre(r.atoms[0]).ok_or_else(|| bad_atom("x<=y"))?;
            let (a2, c) = pre(r.atoms[1]).ok_or_else(|| bad_atom("x<=z"))?;
            if a != a2 {
                return Err(bad_atom("atoms sharing their source"));
            }
            vec![
                link(s.clone(), &[RelAtom::Pre(b, c)]),
                link(s.clone(), &[RelAtom::Pre(c, b)]),
            ]
        }
        (Wk, None) => {
            shape(r, 0, 0)?;
            let keep = r
                .keep
                .as_deref()
                .ok_or_else(|| bad_atom("a weakened premise"))?;
            if !keep.is_subset(s) {
                return Err(bad_atom("a premise contained in the conclusion"));
            }
            vec![keep.clone()]
        }
        _ => return Err(missing()),
    };
    Ok(out)
}

/// The first axiom instance closing `s`, if any.
pub fn find_axiom(s: &Sequent, t: &FormulaTable, variant: LogicVariant) -> Option<RuleInstance> {
    let bot = t.id(&crate::syntax::Formula::Bottom);
    for lf in s.right.iter() {
        match t.node(lf.formula) {
            Node::Prop(_) if s.left.contains(lf) => {
                return Some(RuleInstance::new(RuleName::Id, Some(*lf)))
            }
            _ => {}
        }
    }
    let bot = bot?;
    for lf in s.left.iter().filter(|lf| lf.formula == bot) {
        if variant != LogicVariant::CK {
            return Some(RuleInstance::new(RuleName::IdDiaN, Some(*lf)));
        }
        for f in s.at(Side::Right, lf.label) {
            if matches!(t.node(f), Node::Prop(_) | Node::Bottom) {
                return Some(RuleInstance::new(
                    RuleName::BotL,
                    Some(LabeledFormula::new(lf.label, f)),
                ));
            }
        }
    }
    None
}

/// Minor positions of `r` in premise `k`, given the conclusion `s`.
pub fn minors(s: &Sequent, r: &RuleInstance, k: usize, t: &FormulaTable) -> Vec<Pos> {
    use RuleName::*;
    let Some(p) = r.principal else {
        return Vec::new();
    };
    let x = p.label;
    let at = |side, y, f| Pos {
        side,
        lf: LabeledFormula::new(y, f),
    };
    let (l, rt) = (Side::Left, Side::Right);
    match (r.name, t.node(p.formula)) {
        (AndL, &Node::And(a, b)) => vec![at(l, x, a), at(l, x, b)],
        (AndR, &Node::And(a, b)) => vec![at(rt, x, if k == 0 { a } else { b })],
        (OrL, &Node::Or(a, b)) => vec![at(l, x, if k == 0 { a } else { b })],
        (OrR, &Node::Or(a, b)) => vec![at(rt, x, a), at(rt, x, b)],
        (ImpL, &Node::Implies(a, b)) => vec![if k == 0 { at(rt, x, a) } else { at(l, x, b) }],
        (ImpR, &Node::Implies(a, b)) => vec![at(l, r.fresh[0], a), at(rt, r.fresh[0], b)],
        (BoxL, &Node::Box(a)) => s.acc_succ(x).map(|y| at(l, y, a)).collect(),
        (BoxR, &Node::Box(a)) => vec![at(rt, r.fresh[1], a)],
        (DiaL, &Node::Dia(a)) => vec![at(l, r.fresh[0], a)],
        (DiaR, Node::Dia(_)) => vec![at(rt, r.fresh[0], t.local_dia_of(p.formula))],
        (LocalDiaR, &Node::LocalDia(a)) => s.acc_succ(x).map(|y| at(rt, y, a)).collect(),
        (FixL, &Node::Fix { body, .. }) => vec![at(l, x, body)],
        (FixR, &Node::Fix { body, .. }) => vec![at(rt, x, body)],
        (RegenL, &Node::Var { binder, .. }) => vec![at(l, x, binder)],
        (RegenR, &Node::Var { binder, .. }) => vec![at(rt, x, binder)],
        (PrePres, _) => r
            .atoms
            .iter()
            .filter_map(|a| match *a {
                RelAtom::Pre(_, y) => Some(at(l, y, p.formula)),
                _ => None,
            })
            .collect(),
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{analyze, parse, WellNamedSentence};

    fn goal(s: &str) -> WellNamedSentence {
        analyze(&parse(s).unwrap()).unwrap()
    }

    fn lf(t: &FormulaTable, x: u32, f: &str) -> LabeledFormula {
        LabeledFormula::new(Label(x), t.id(&parse(f).unwrap()).unwrap())
    }

    #[test]
    fn bot_left_is_an_axiom() {
        let g = goal("false -> p");
        let t = g.table();
        let mut s = Sequent::new();
        s.left.insert(lf(t, 0, "false"));
        s.right.insert(lf(t, 0, "p"));
        let ax = find_axiom(&s, t, LogicVariant::CK).unwrap();
        assert_eq!(ax.name, RuleName::BotL);
        assert_eq!(apply_rule(&s, &ax, t, LogicVariant::CK).unwrap(), vec![]);
    }

    #[test]
    fn imp_right_premise() {
        let g = goal("p -> q");
        let t = g.table();
        let s = Sequent::goal(Label(0), t.root());
        let r = RuleInstance::new(RuleName::ImpR, Some(lf(t, 0, "p -> q"))).with_fresh([Label(1)]);
        let prem = apply_rule(&s, &r, t, LogicVariant::CK).unwrap();
        assert_eq!(prem.len(), 1);
        assert_eq!(prem[0].show(t), "x0<=x1 | x1:p ⊢ x0:p -> q, x1:q");
        let clash =
            RuleInstance::new(RuleName::ImpR, Some(lf(t, 0, "p -> q"))).with_fresh([Label(0)]);
        assert_eq!(
            apply_rule(&s, &clash, t, LogicVariant::CK),
            Err(RuleError::FreshnessViolation(RuleName::ImpR, Label(0)))
        );
    }

    #[test]
    fn box_left_reaches_every_successor() {
        let g = goal("[]p -> q");
        let t = g.table();
        let mut s = Sequent::new();
        s.left.insert(lf(t, 0, "[]p"));
        s.rel.insert(RelAtom::Acc(Label(0), Label(1)));
        s.rel.insert(RelAtom::Acc(Label(0), Label(2)));
        let r = RuleInstance::new(RuleName::BoxL, Some(lf(t, 0, "[]p")));
        let prem = apply_rule(&s, &r, t, LogicVariant::CK).unwrap();
        assert!(prem[0].left.contains(&lf(t, 1, "p")));
        assert!(prem[0].left.contains(&lf(t, 2, "p")));
        assert!(s.is_subset(&prem[0]));
    }

    #[test]
    fn variant_gating_and_missing_principal() {
        let g = goal("p");
        let t = g.table();
        let mut s = Sequent::goal(Label(0), t.root());
        s.rel.insert(RelAtom::Pre(Label(0), Label(1)));
        s.rel.insert(RelAtom::Pre(Label(0), Label(2)));
        let lin = RuleInstance::new(RuleName::Lin, None).with_atoms([
            RelAtom::Pre(Label(0), Label(1)),
            RelAtom::Pre(Label(0), Label(2)),
        ]);
        assert_eq!(
            apply_rule(&s, &lin, t, LogicVariant::IK),
            Err(RuleError::RuleNotInVariant(RuleName::Lin, LogicVariant::IK))
        );
        assert_eq!(apply_rule(&s, &lin, t, LogicVariant::GK).unwrap().len(), 2);
        let and = RuleInstance::new(RuleName::AndL, Some(lf(t, 0, "p")));
        assert_eq!(
            apply_rule(&s, &and, t, LogicVariant::CK),
            Err(RuleError::PrincipalMissing(RuleName::AndL))
        );
    }

    #[test]
    fn names_round_trip() {
        for (r, n) in NAMES {
            assert_eq!(n.parse::<RuleName>().unwrap(), r);
            assert_eq!(r.to_string(), n);
        }
    }
}
