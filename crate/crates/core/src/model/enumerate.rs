use super::{validate, LogicVariant, Model, Relation};
use crate::worldset::WorldSet;
use std::collections::BTreeMap;

fn preorders(n: usize) -> Vec<Relation> {
    let off: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << off.len()) {
        let mut r = Relation::identity(n);
        for (i, &(a, b)) in off.iter().enumerate() {
            if mask >> i & 1 == 1 {
                r.insert(a, b);
            }
        }
        if r.reflexive_transitive_closure() == r {
            out.push(r);
        }
    }
    out
}

fn relation_from_mask(n: usize, mask: u64) -> Relation {
    Relation::from_pairs(
        n,
        (0..n * n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| (i / n, i % n)),
    )
}

fn is_up_closed(set: &WorldSet, r: &Relation) -> bool {
    set.iter().all(|w| r.successors(w).is_subset(set))
}

/// All subsets of `0..n` as sets.
fn subsets(n: usize) -> impl Iterator<Item = WorldSet> {
    (0u64..(1 << n)).map(move |m| WorldSet::from_mask(n, m))
}

/// Every valuation assigning each proposition an up-closed superset of
/// `fallible`.
fn valuations(
    n: usize,
    pre: &Relation,
    fallible: &WorldSet,
    props: &[String],
) -> Vec<BTreeMap<String, WorldSet>> {
    let upsets: Vec<WorldSet> = subsets(n)
        .filter(|s| fallible.is_subset(s) && is_up_closed(s, pre))
        .collect();
    let mut out = vec![BTreeMap::new()];
    for p in props {
        out = out
            .into_iter()
            .flat_map(|v| {
                upsets.iter().map(move |u| {
                    let mut v = v.clone();
                    v.insert(p.clone(), u.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Every valid model with `1..=max_worlds` worlds named `w0, w1, …`, in a
/// fixed order: world count, preorder, modal relation, fallible set,
/// valuation. No isomorphism reduction.
pub fn enumerate_models(
    max_worlds: usize,
    props: &[String],
    variant: LogicVariant,
) -> impl Iterator<Item = Model> {
    assert!(
        max_worlds <= 5,
        "enumeration beyond 5 worlds is not supported"
    );
    let props = props.to_vec();
    (1..=max_worlds).flat_map(move |n| {
        let props = props.clone();
        preorders(n).into_iter().flat_map(move |pre| {
            let props = props.clone();
            (0u64..(1 << (n * n))).flat_map(move |rmask| {
                let rel = relation_from_mask(n, rmask);
                let fallibles: Vec<WorldSet> = match variant {
                    LogicVariant::CK => subsets(n)
                        .filter(|f| is_up_closed(f, &pre) && is_up_closed(f, &rel))
                        .collect(),
                    _ => vec![WorldSet::empty(n)],
                };
                let mut out = Vec::new();
                let frame = Model::from_parts(
                    Model::default_world_names(n),
                    WorldSet::empty(n),
                    pre.clone(),
                    rel.clone(),
                    BTreeMap::new(),
                );
                if variant != LogicVariant::CK && !validate(&frame, variant).is_empty() {
                    return out.into_iter();
                }
                for fallible in fallibles {
                    for val in valuations(n, &pre, &fallible, &props) {
                        out.push(Model::from_parts(
                            Model::default_world_names(n),
                            fallible.clone(),
                            pre.clone(),
                            rel.clone(),
                            val,
                        ));
                    }
                }
                out.into_iter()
            })
        })
    })
}
