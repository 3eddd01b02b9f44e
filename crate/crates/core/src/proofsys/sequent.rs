use crate::syntax::{parse_internal, FId, FormulaTable};
use im::OrdSet;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A world variable `x<n>`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl Label {
    pub fn parse(s: &str) -> Option<Label> {
        s.trim().strip_prefix('x')?.parse().ok().map(Label)
    }
}

/// `x ⪯ y` or `x R y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelAtom {
    Pre(Label, Label),
    Acc(Label, Label),
}

impl RelAtom {
    pub fn labels(self) -> [Label; 2] {
        match self {
            RelAtom::Pre(a, b) | RelAtom::Acc(a, b) => [a, b],
        }
    }

    pub fn map(self, f: impl Fn(Label) -> Label) -> RelAtom {
        match self {
            RelAtom::Pre(a, b) => RelAtom::Pre(f(a), f(b)),
            RelAtom::Acc(a, b) => RelAtom::Acc(f(a), f(b)),
        }
    }

    pub fn parse(s: &str) -> Option<RelAtom> {
        if let Some((a, b)) = s.split_once("<=") {
            return Some(RelAtom::Pre(Label::parse(a)?, Label::parse(b)?));
        }
        let (a, b) = s.split_once(" R ")?;
        Some(RelAtom::Acc(Label::parse(a)?, Label::parse(b)?))
    }
}

impl fmt::Display for RelAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelAtom::Pre(a, b) => write!(f, "{a}<={b}"),
            RelAtom::Acc(a, b) => write!(f, "{a} R {b}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledFormula {
    pub label: Label,
    pub formula: FId,
}

impl LabeledFormula {
    pub fn new(label: Label, formula: FId) -> Self {
        LabeledFormula { label, formula }
    }

    pub fn show(&self, t: &FormulaTable) -> String {
        format!("{}:{}", self.label, t.formula(self.formula))
    }

    pub fn parse(s: &str, t: &FormulaTable) -> Result<LabeledFormula, String> {
        let (l, f) = s
            .split_once(':')
            .ok_or_else(|| format!("expected label:formula, got {s:?}"))?;
        let label = Label::parse(l).ok_or_else(|| format!("bad label {l:?}"))?;
        let f = parse_internal(f.trim()).map_err(|e| e.to_string())?;
        let formula = t
            .id(&f)
            .ok_or_else(|| format!("{f} is not in the closure of the goal"))?;
        Ok(LabeledFormula { label, formula })
    }
}

/// A renaming or homomorphism of labels.
pub type LabelMap = BTreeMap<Label, Label>;

/// A trace position: a labelled formula on one side of a sequent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub side: Side,
    pub lf: LabeledFormula,
}

/// `𝐑, Γ ⊢ Δ`. Backed by persistent sets, so clones share structure.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub rel: OrdSet<RelAtom>,
    pub left: OrdSet<LabeledFormula>,
    pub right: OrdSet<LabeledFormula>,
}

impl Sequent {
    pub fn new() -> Self {
        Sequent::default()
    }

    pub fn goal(root: Label, f: FId) -> Self {
        let mut s = Sequent::new();
        s.right.insert(LabeledFormula::new(root, f));
        s
    }

    pub fn side(&self, side: Side) -> &OrdSet<LabeledFormula> {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut OrdSet<LabeledFormula> {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    pub fn has(&self, side: Side, x: Label, f: FId) -> bool {
        self.side(side).contains(&LabeledFormula::new(x, f))
    }

    pub fn contains_pos(&self, p: &Pos) -> bool {
        self.side(p.side).contains(&p.lf)
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        self.left
            .iter()
            .map(|&lf| Pos {
                side: Side::Left,
                lf,
            })
            .chain(self.right.iter().map(|&lf| Pos {
                side: Side::Right,
                lf,
            }))
    }

    /// Formulas labelled `x` on one side.
    pub fn at(&self, side: Side, x: Label) -> impl Iterator<Item = FId> + '_ {
        let lo = LabeledFormula::new(x, FId(0));
        let hi = LabeledFormula::new(x, FId(u32::MAX));
        self.side(side).range(lo..=hi).map(|lf| lf.formula)
    }

    pub fn pre_succ(&self, x: Label) -> impl Iterator<Item = Label> + '_ {
        self.rel
            .range(RelAtom::Pre(x, Label(0))..=RelAtom::Pre(x, Label(u32::MAX)))
            .map(|a| a.labels()[1])
    }

    pub fn acc_succ(&self, x: Label) -> impl Iterator<Item = Label> + '_ {
        self.rel
            .range(RelAtom::Acc(x, Label(0))..=RelAtom::Acc(x, Label(u32::MAX)))
            .map(|a| a.labels()[1])
    }

    pub fn pre_atoms(&self) -> impl Iterator<Item = (Label, Label)> + '_ {
        self.rel.iter().filter_map(|a| match *a {
            RelAtom::Pre(x, y) => Some((x, y)),
            RelAtom::Acc(..) => None,
        })
    }

    pub fn acc_atoms(&self) -> impl Iterator<Item = (Label, Label)> + '_ {
        self.rel.iter().filter_map(|a| match *a {
            RelAtom::Acc(x, y) => Some((x, y)),
            RelAtom::Pre(..) => None,
        })
    }

    /// `x ⪯ y`, counting reflexivity.
    pub fn pre_refl(&self, x: Label, y: Label) -> bool {
        x == y || self.rel.contains(&RelAtom::Pre(x, y))
    }

    pub fn acc(&self, x: Label, y: Label) -> bool {
        self.rel.contains(&RelAtom::Acc(x, y))
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for a in self.rel.iter() {
            out.extend(a.labels());
        }
        out.extend(self.left.iter().map(|lf| lf.label));
        out.extend(self.right.iter().map(|lf| lf.label));
        out
    }

    pub fn max_label(&self) -> Option<Label> {
        self.labels().into_iter().next_back()
    }

    pub fn size(&self) -> usize {
        self.rel.len() + self.left.len() + self.right.len()
    }

    /// Componentwise inclusion.
    pub fn is_subset(&self, other: &Sequent) -> bool {
        self.rel.is_subset(&other.rel)
            && self.left.is_subset(&other.left)
            && self.right.is_subset(&other.right)
    }

    pub fn rename(&self, theta: &BTreeMap<Label, Label>) -> Sequent {
        let f = |x: Label| *theta.get(&x).unwrap_or(&x);
        Sequent {
            rel: self.rel.iter().map(|a| a.map(f)).collect(),
            left: self
                .left
                .iter()
                .map(|lf| LabeledFormula::new(f(lf.label), lf.formula))
                .collect(),
            right: self
                .right
                .iter()
                .map(|lf| LabeledFormula::new(f(lf.label), lf.formula))
                .collect(),
        }
    }

    /// The part of the sequent mentioning only labels in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<Label>) -> Sequent {
        Sequent {
            rel: self
                .rel
                .iter()
                .copied()
                .filter(|a| a.labels().iter().all(|l| keep.contains(l)))
                .collect(),
            left: self
                .left
                .iter()
                .copied()
                .filter(|lf| keep.contains(&lf.label))
                .collect(),
            right: self
                .right
                .iter()
                .copied()
                .filter(|lf| keep.contains(&lf.label))
                .collect(),
        }
    }

    pub fn show(&self, t: &FormulaTable) -> String {
        let rel: Vec<String> = self.rel.iter().map(|a| a.to_string()).collect();
        let left: Vec<String> = self.left.iter().map(|lf| lf.show(t)).collect();
        let right: Vec<String> = self.right.iter().map(|lf| lf.show(t)).collect();
        format!(
            "{} | {} ⊢ {}",
            rel.join(", "),
            left.join(", "),
            right.join(", ")
        )
    }

    pub fn parse(s: &str, t: &FormulaTable) -> Result<Sequent, String> {
        let (rel, rest) = s
            .split_once(" | ")
            .or_else(|| s.strip_prefix("| ").map(|r| ("", r)))
            .ok_or("missing ' | '")?;
        let (left, right) = rest.split_once('⊢').ok_or("missing '⊢'")?;
        let items = |part: &str| -> Vec<String> {
            part.split(", ")
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(String::from)
                .collect()
        };
        let mut seq = Sequent::new();
        for a in items(rel) {
            seq.rel
                .insert(RelAtom::parse(&a).ok_or_else(|| format!("bad relational atom {a:?}"))?);
        }
        for lf in items(left) {
            seq.left.insert(LabeledFormula::parse(&lf, t)?);
        }
        for lf in items(right) {
            seq.right.insert(LabeledFormula::parse(&lf, t)?);
        }
        Ok(seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{analyze, parse};

    #[test]
    fn show_and_parse_round_trip() {
        let s = analyze(&parse("(p | q) -> []<>p").unwrap()).unwrap();
        let t = s.table();
        let mut seq = Sequent::goal(Label(0), t.root());
        seq.rel.insert(RelAtom::Pre(Label(0), Label(1)));
        seq.rel.insert(RelAtom::Acc(Label(1), Label(2)));
        let pq = t.id(&parse("p | q").unwrap()).unwrap();
        seq.left.insert(LabeledFormula::new(Label(1), pq));
        let text = seq.show(t);
        assert_eq!(text, "x0<=x1, x1 R x2 | x1:p | q ⊢ x0:p | q -> []<>p");
        assert_eq!(Sequent::parse(&text, t).unwrap(), seq);
        let empty = Sequent::new();
        assert_eq!(Sequent::parse(&empty.show(t), t).unwrap(), empty);
    }

    #[test]
    fn range_queries() {
        let mut seq = Sequent::new();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            seq.rel.insert(RelAtom::Pre(Label(a), Label(b)));
        }
        seq.rel.insert(RelAtom::Acc(Label(0), Label(3)));
        assert_eq!(
            seq.pre_succ(Label(0)).collect::<Vec<_>>(),
            vec![Label(1), Label(2)]
        );
        assert_eq!(seq.acc_succ(Label(0)).collect::<Vec<_>>(), vec![Label(3)]);
        assert!(seq.pre_refl(Label(2), Label(2)));
        assert_eq!(seq.labels().len(), 4);
    }
}
