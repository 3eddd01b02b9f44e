//! Finite birelational models `⟨W, W⊥, ⪯, R, V⟩` and their frame conditions.

mod document;
mod enumerate;
mod random;

pub use document::{close, ClosureOptions, ModelDocument, ModelError};
pub use enumerate::enumerate_models;
pub use random::{random_model, GenerationError, RandomParams};

use crate::worldset::WorldSet;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LogicVariant {
    CK,
    IK,
    GK,
}

impl LogicVariant {
    pub const ALL: [LogicVariant; 3] = [LogicVariant::CK, LogicVariant::IK, LogicVariant::GK];
}

impl fmt::Display for LogicVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicVariant::CK => "ck",
            LogicVariant::IK => "ik",
            LogicVariant::GK => "gk",
        })
    }
}

impl FromStr for LogicVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ck" => Ok(LogicVariant::CK),
            "ik" => Ok(LogicVariant::IK),
            "gk" => Ok(LogicVariant::GK),
            other => Err(format!("unknown logic {other:?} (expected ck, ik or gk)")),
        }
    }
}

/// A binary relation on the worlds of one model, stored as successor rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation(Vec<WorldSet>);

impl Relation {
    pub fn empty(n: usize) -> Self {
        Relation(vec![WorldSet::empty(n); n])
    }

    pub fn identity(n: usize) -> Self {
        Relation((0..n).map(|w| WorldSet::singleton(n, w)).collect())
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Self::empty(n);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, a: usize, b: usize) -> bool {
        self.0[a].insert(b)
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.0[a].contains(b)
    }

    pub fn successors(&self, a: usize) -> &WorldSet {
        &self.0[a]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().map(move |b| (a, b)))
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|r| r.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|r| r.is_empty())
    }

    /// `self ; other`.
    pub fn compose(&self, other: &Relation) -> Relation {
        let n = self.size();
        Relation(
            self.0
                .iter()
                .map(|row| {
                    let mut out = WorldSet::empty(n);
                    for v in row.iter() {
                        out.union_with(&other.0[v]);
                    }
                    out
                })
                .collect(),
        )
    }

    pub fn reflexive_transitive_closure(&self) -> Relation {
        let n = self.size();
        let mut r = self.clone();
        for w in 0..n {
            r.insert(w, w);
        }
        for k in 0..n {
            for i in 0..n {
                if r.contains(i, k) {
                    let row = r.0[k].clone();
                    r.0[i].union_with(&row);
                }
            }
        }
        r
    }
}

/// The augmented valuation for free variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env(BTreeMap<String, WorldSet>);

impl Env {
    pub fn new() -> Self {
        Env(BTreeMap::new())
    }

    pub fn with(mut self, x: &str, set: WorldSet) -> Self {
        self.0.insert(x.to_string(), set);
        self
    }

    pub fn insert(&mut self, x: &str, set: WorldSet) {
        self.0.insert(x.to_string(), set);
    }

    pub fn get(&self, x: &str) -> Option<&WorldSet> {
        self.0.get(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &WorldSet)> {
        self.0.iter()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    worlds: Vec<String>,
    index: HashMap<String, usize>,
    fallible: WorldSet,
    pre: Relation,
    rel: Relation,
    val: BTreeMap<String, WorldSet>,
    pre_rel: Relation,
}

impl Model {
    /// Assembles a model without checking any invariant.
    pub fn from_parts(
        worlds: Vec<String>,
        fallible: WorldSet,
        pre: Relation,
        rel: Relation,
        val: BTreeMap<String, WorldSet>,
    ) -> Self {
        let index = worlds
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let pre_rel = pre.compose(&rel);
        Model {
            worlds,
            index,
            fallible,
            pre,
            rel,
            val,
            pre_rel,
        }
    }

    pub fn default_world_names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_name(&self, w: usize) -> &str {
        &self.worlds[w]
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn all(&self) -> WorldSet {
        WorldSet::full(self.len())
    }

    pub fn fallible(&self) -> &WorldSet {
        &self.fallible
    }

    pub fn pre(&self) -> &Relation {
        &self.pre
    }

    pub fn rel(&self) -> &Relation {
        &self.rel
    }

    /// `⪯;R`, precomputed.
    pub fn pre_rel(&self) -> &Relation {
        &self.pre_rel
    }

    pub fn valuation(&self) -> &BTreeMap<String, WorldSet> {
        &self.val
    }

    /// `V(P)`; a proposition the model does not mention holds exactly at the
    /// fallible worlds.
    pub fn val(&self, p: &str) -> WorldSet {
        self.val
            .get(p)
            .cloned()
            .unwrap_or_else(|| self.fallible.clone())
    }

    pub fn names_of(&self, set: &WorldSet) -> Vec<String> {
        let mut v: Vec<String> = set.iter().map(|w| self.worlds[w].clone()).collect();
        v.sort();
        v
    }

    pub fn validate(&self, variant: LogicVariant) -> Vec<Violation> {
        validate(self, variant)
    }
}

/// `{(w,u) | ∃v. w ⪯ v ∧ v R u}`.
pub fn compose_pre_rel(m: &Model) -> Relation {
    m.pre.compose(&m.rel)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    PreNotReflexive {
        world: String,
    },
    PreNotTransitive {
        a: String,
        b: String,
        c: String,
    },
    HeredityViolated {
        prop: String,
        from: String,
        to: String,
    },
    FallibleNotInValuation {
        prop: String,
        world: String,
    },
    FallibleNotClosedUnderPre {
        from: String,
        to: String,
    },
    FallibleNotClosedUnderRel {
        from: String,
        to: String,
    },
    FallibleNotEmpty {
        world: String,
    },
    NotForwardConfluent {
        w: String,
        w2: String,
        v: String,
    },
    NotBackwardConfluent {
        w: String,
        v: String,
        v2: String,
    },
    NotLocallyLinear {
        w: String,
        v: String,
        u: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PreNotReflexive { world } => write!(f, "pre not reflexive at {world}"),
            Violation::PreNotTransitive { a, b, c } => {
                write!(
                    f,
                    "pre not transitive: {a} <= {b} <= {c} but not {a} <= {c}"
                )
            }
            Violation::HeredityViolated { prop, from, to } => {
                write!(
                    f,
                    "heredity fails for {prop}: true at {from}, false at {to} with {from} <= {to}"
                )
            }
            Violation::FallibleNotInValuation { prop, world } => {
                write!(f, "fallible world {world} missing from V({prop})")
            }
            Violation::FallibleNotClosedUnderPre { from, to } => {
                write!(f, "fallible worlds not closed under pre: {from} <= {to}")
            }
            Violation::FallibleNotClosedUnderRel { from, to } => {
                write!(f, "fallible worlds not closed under R: {from} R {to}")
            }
            Violation::FallibleNotEmpty { world } => {
                write!(f, "W⊥ = ∅ required, but {world} is fallible")
            }
            Violation::NotForwardConfluent { w, w2, v } => {
                write!(f, "not forward confluent: {w} <= {w2}, {w} R {v}")
            }
            Violation::NotBackwardConfluent { w, v, v2 } => {
                write!(f, "not backward confluent: {w} R {v}, {v} <= {v2}")
            }
            Violation::NotLocallyLinear { w, v, u } => {
                write!(
                    f,
                    "not locally linear: {w} <= {v}, {w} <= {u}, {v} and {u} incomparable"
                )
            }
        }
    }
}

pub fn validate(m: &Model, variant: LogicVariant) -> Vec<Violation> {
    let n = m.len();
    let name = |w: usize| m.worlds[w].clone();
    let mut out = Vec::new();
    for w in 0..n {
        if !m.pre.contains(w, w) {
            out.push(Violation::PreNotReflexive { world: name(w) });
        }
    }
    for (a, b) in m.pre.pairs() {
        for c in m.pre.successors(b).iter() {
            if !m.pre.contains(a, c) {
                out.push(Violation::PreNotTransitive {
                    a: name(a),
                    b: name(b),
                    c: name(c),
                });
            }
        }
    }
    for (p, set) in &m.val {
        for (a, b) in m.pre.pairs() {
            if set.contains(a) && !set.contains(b) {
                out.push(Violation::HeredityViolated {
                    prop: p.clone(),
                    from: name(a),
                    to: name(b),
                });
            }
        }
        for w in m.fallible.iter() {
            if !set.contains(w) {
                out.push(Violation::FallibleNotInValuation {
                    prop: p.clone(),
                    world: name(w),
                });
            }
        }
    }
    for w in m.fallible.iter() {
        for v in m
            .pre
            .successors(w)
            .iter()
            .filter(|v| !m.fallible.contains(*v))
        {
            out.push(Violation::FallibleNotClosedUnderPre {
                from: name(w),
                to: name(v),
            });
        }
        for v in m
            .rel
            .successors(w)
            .iter()
            .filter(|v| !m.fallible.contains(*v))
        {
            out.push(Violation::FallibleNotClosedUnderRel {
                from: name(w),
                to: name(v),
            });
        }
    }
    if variant == LogicVariant::CK {
        return out;
    }
    for w in m.fallible.iter() {
        out.push(Violation::FallibleNotEmpty { world: name(w) });
    }
    // forward: w ⪯ w', w R v ⇒ ∃v'. w' R v' ∧ v ⪯ v'
    for (w, w2) in m.pre.pairs() {
        for v in m.rel.successors(w).iter() {
            if !m.rel.successors(w2).intersects(m.pre.successors(v)) {
                out.push(Violation::NotForwardConfluent {
                    w: name(w),
                    w2: name(w2),
                    v: name(v),
                });
            }
        }
    }
    // backward: w R v, v ⪯ v' ⇒ ∃w'. w ⪯ w' ∧ w' R v'
    for (w, v) in m.rel.pairs() {
        for v2 in m.pre.successors(v).iter() {
            if !m.pre.successors(w).iter().any(|w2| m.rel.contains(w2, v2)) {
                out.push(Violation::NotBackwardConfluent {
                    w: name(w),
                    v: name(v),
                    v2: name(v2),
                });
            }
        }
    }
    if variant == LogicVariant::GK {
        for w in 0..n {
            let up: Vec<usize> = m.pre.successors(w).iter().collect();
            for (i, &v) in up.iter().enumerate() {
                for &u in &up[i + 1..] {
                    if !m.pre.contains(v, u) && !m.pre.contains(u, v) {
                        out.push(Violation::NotLocallyLinear {
                            w: name(w),
                            v: name(v),
                            u: name(u),
                        });
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_world(pre: bool, fallible: bool) -> Model {
        let pre = if pre {
            Relation::identity(1)
        } else {
            Relation::empty(1)
        };
        let fal = if fallible {
            WorldSet::full(1)
        } else {
            WorldSet::empty(1)
        };
        Model::from_parts(
            vec!["w".into()],
            fal,
            pre,
            Relation::empty(1),
            BTreeMap::new(),
        )
    }

    #[test]
    fn trivial_model_valid_everywhere() {
        for v in LogicVariant::ALL {
            assert!(validate(&one_world(true, false), v).is_empty());
        }
    }

    #[test]
    fn missing_reflexivity_reported() {
        let report = validate(&one_world(false, false), LogicVariant::CK);
        assert_eq!(
            report,
            vec![Violation::PreNotReflexive { world: "w".into() }]
        );
        assert_eq!(report[0].to_string(), "pre not reflexive at w");
    }

    #[test]
    fn ik_requires_no_fallible_worlds() {
        let m = one_world(true, true);
        assert!(validate(&m, LogicVariant::CK).is_empty());
        let report = validate(&m, LogicVariant::IK);
        assert_eq!(
            report,
            vec![Violation::FallibleNotEmpty { world: "w".into() }]
        );
        assert!(report[0].to_string().contains("W⊥ = ∅ required"));
    }

    #[test]
    fn composition_examples() {
        let pre = Relation::from_pairs(3, [(0, 0), (1, 1), (2, 2), (0, 1)]);
        let rel = Relation::from_pairs(3, [(1, 2)]);
        let m = Model::from_parts(
            Model::default_world_names(3),
            WorldSet::empty(3),
            pre,
            rel,
            BTreeMap::new(),
        );
        let c = compose_pre_rel(&m);
        assert!(c.contains(0, 2));
        assert!(c.contains(1, 2));
        assert_eq!(c.len(), 2);
        let bare = Model::from_parts(
            Model::default_world_names(2),
            WorldSet::empty(2),
            Relation::identity(2),
            Relation::empty(2),
            BTreeMap::new(),
        );
        assert!(compose_pre_rel(&bare).is_empty());
    }

    #[test]
    fn confluence_and_linearity() {
        // w0 <= w1, w0 R w2, nothing above w2 reachable from w1
        let pre = Relation::from_pairs(3, [(0, 1)]).reflexive_transitive_closure();
        let rel = Relation::from_pairs(3, [(0, 2)]);
        let m = Model::from_parts(
            Model::default_world_names(3),
            WorldSet::empty(3),
            pre,
            rel,
            BTreeMap::new(),
        );
        assert!(validate(&m, LogicVariant::CK).is_empty());
        assert!(validate(&m, LogicVariant::IK)
            .iter()
            .any(|v| matches!(v, Violation::NotForwardConfluent { .. })));
        let fork = Relation::from_pairs(3, [(0, 1), (0, 2)]).reflexive_transitive_closure();
        let m = Model::from_parts(
            Model::default_world_names(3),
            WorldSet::empty(3),
            fork,
            Relation::empty(3),
            BTreeMap::new(),
        );
        assert!(validate(&m, LogicVariant::IK).is_empty());
        assert_eq!(validate(&m, LogicVariant::GK).len(), 1);
    }
}
