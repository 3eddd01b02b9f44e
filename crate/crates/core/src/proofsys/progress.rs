use super::graph::{check_map, Premise, ProofError, ProofGraph, Step};
use super::sequent::Pos;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use std::collections::{BTreeMap, HashMap, HashSet};

/// A path `stem` from the root followed by `cycle` repeated forever, along
/// which no trace progresses. Both list node ids; `cycle` starts and ends at
/// the same node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Progress {
    Accept,
    Reject(Lasso),
}

const SUMMARY_LIMIT: usize = 50_000;

/// Whether `a` is at least as good as `b` for a trace: even beats odd,
/// larger even is better, smaller odd is better.
pub(crate) fn better(a: u32, b: u32) -> u32 {
    let key = |p: u32| {
        if p % 2 == 0 {
            (1, p as i64)
        } else {
            (0, -(p as i64))
        }
    };
    if key(a) >= key(b) {
        a
    } else {
        b
    }
}

/// The best trace priority between each pair of positions.
pub(crate) type Summary = BTreeMap<(Pos, Pos), u32>;

/// Steps grouped by source position.
pub(crate) type StepIndex = HashMap<Pos, Vec<(Pos, u32)>>;

pub(crate) fn index_steps(steps: &[Step]) -> StepIndex {
    let mut out = StepIndex::new();
    for &(a, b, p) in steps {
        out.entry(a).or_default().push((b, p));
    }
    out
}

fn push(s: &mut Summary, k: (Pos, Pos), p: u32) {
    s.entry(k).and_modify(|q| *q = better(*q, p)).or_insert(p);
}

pub(crate) fn extend(s: &Summary, steps: &StepIndex) -> Summary {
    let mut out = Summary::new();
    for (&(a, m), &p) in s {
        for &(b, q) in steps.get(&m).into_iter().flatten() {
            push(&mut out, (a, b), p.max(q));
        }
    }
    out
}

fn compose(s: &Summary, t: &Summary) -> Summary {
    let mut by_src = StepIndex::new();
    for (&(a, b), &p) in t {
        by_src.entry(a).or_default().push((b, p));
    }
    extend(s, &by_src)
}

pub(crate) fn identity(positions: impl Iterator<Item = Pos>) -> Summary {
    positions.map(|p| ((p, p), 0)).collect()
}

/// Whether some infinite trace through the loop `m`, repeated forever, is
/// progressing. Exact: looks for a cycle of the summary graph whose largest
/// priority is even.
pub(crate) fn loop_progresses(m: &Summary) -> bool {
    let mut evens: Vec<u32> = m.values().copied().filter(|p| p % 2 == 0).collect();
    evens.sort_unstable();
    evens.dedup();
    for p in evens {
        let mut g: DiGraph<Pos, u32> = DiGraph::new();
        let mut idx = HashMap::new();
        for (&(a, b), &q) in m.iter().filter(|(_, &q)| q <= p) {
            let x = *idx.entry(a).or_insert_with(|| g.add_node(a));
            let y = *idx.entry(b).or_insert_with(|| g.add_node(b));
            g.add_edge(x, y, q);
        }
        let sccs = tarjan_scc(&g);
        let mut comp = vec![0; g.node_count()];
        for (c, scc) in sccs.iter().enumerate() {
            for &v in scc {
                comp[v.index()] = c;
            }
        }
        for e in g.edge_indices() {
            let (x, y) = g.edge_endpoints(e).unwrap();
            if g[e] == p && comp[x.index()] == comp[y.index()] {
                return true;
            }
        }
    }
    false
}

/// Whether every infinite path of the graph's unravelling carries a
/// progressing trace.
///
/// Paths are cut at back-edge targets. Summaries of the segments between
/// cut points are closed under composition; the graph is accepted iff every
/// idempotent loop summary has a diagonal entry of even priority.
pub fn check_progress(g: &ProofGraph) -> Result<Progress, ProofError> {
    let parent = g.parents();
    let mut companion = vec![false; g.len()];
    for (i, n) in g.nodes.iter().enumerate() {
        if let [Premise::Back { target, map }] = n.premises.as_slice() {
            check_map(i, &g.nodes[*target].seq, &n.seq, map)?;
            companion[*target] = true;
        }
    }
    if !companion.iter().any(|&c| c) {
        return Ok(Progress::Accept);
    }
    let mut out_edges: Vec<Vec<(usize, StepIndex)>> = vec![Vec::new(); g.len()];
    for (from, to, steps) in g.edges() {
        out_edges[from].push((to, index_steps(&steps)));
    }

    // segments: (from companion, to companion, summary, nodes walked)
    type Seg = (usize, usize, Summary, Vec<usize>);
    let mut segments: Vec<Seg> = Vec::new();
    for b in (0..g.len()).filter(|&b| companion[b]) {
        let start = identity(g.nodes[b].seq.positions());
        let mut stack = vec![(b, start, vec![b])];
        while let Some((u, s, path)) = stack.pop() {
            for (v, steps) in &out_edges[u] {
                let next = extend(&s, steps);
                let mut p = path.clone();
                p.push(*v);
                let is_tree = parent[*v] == Some(u);
                if !is_tree || companion[*v] {
                    segments.push((b, *v, next, p));
                } else {
                    stack.push((*v, next, p));
                }
            }
        }
    }

    type Key = (usize, usize, Vec<((Pos, Pos), u32)>);
    let mut seen: HashSet<Key> = HashSet::new();
    let mut all: Vec<Seg> = Vec::new();
    let mut queue: Vec<usize> = Vec::new();
    let key = |s: &Seg| {
        (
            s.0,
            s.1,
            s.2.iter().map(|(k, v)| (*k, *v)).collect::<Vec<_>>(),
        )
    };
    for s in segments.iter() {
        if seen.insert(key(s)) {
            queue.push(all.len());
            all.push(s.clone());
        }
    }
    while let Some(i) = queue.pop() {
        if all.len() > SUMMARY_LIMIT {
            return Err(ProofError::ProgressLimit(all.len()));
        }
        let (a, b) = (all[i].0, all[i].1);
        // right extension by base segments reaches every product
        let mut fresh = Vec::new();
        for s in &segments {
            if s.0 == b {
                let mut p = all[i].3.clone();
                p.extend(&s.3[1..]);
                fresh.push((a, s.1, compose(&all[i].2, &s.2), p));
            }
        }
        for s in fresh {
            if seen.insert(key(&s)) {
                queue.push(all.len());
                all.push(s);
            }
        }
    }

    for s in &all {
        if s.0 != s.1 || compose(&s.2, &s.2) != s.2 {
            continue;
        }
        let good = s.2.iter().any(|(&(a, b), &p)| a == b && p % 2 == 0);
        if !good {
            let mut stem = vec![s.0];
            let mut cur = s.0;
            while let Some(p) = parent[cur] {
                stem.push(p);
                cur = p;
            }
            stem.reverse();
            return Ok(Progress::Reject(Lasso {
                stem,
                cycle: s.3.clone(),
            }));
        }
    }
    Ok(Progress::Accept)
}

#[cfg(test)]
mod tests {
    use super::super::graph::ProofNode;
    use super::super::rules::{RuleInstance, RuleName};
    use super::super::sequent::{Label, LabeledFormula, RelAtom, Sequent};
    use super::*;
    use crate::model::LogicVariant;
    use crate::syntax::{analyze, parse, WellNamedSentence};

    fn lf(g: &WellNamedSentence, x: u32, f: &str) -> LabeledFormula {
        LabeledFormula::new(Label(x), g.table().id(&parse(f).unwrap()).unwrap())
    }

    /// `⊢ x0:ηX.[]X`, unfolded once, with a back-edge `x0 -> x2`.
    fn single_loop(goal: &str) -> ProofGraph {
        let g = analyze(&parse(goal).unwrap()).unwrap();
        let t = g.table().clone();
        let s0 = Sequent::goal(Label(0), t.root());
        let fix = RuleInstance::new(RuleName::FixR, Some(lf(&g, 0, goal)));
        let mut s1 = s0.clone();
        s1.right.insert(lf(&g, 0, "[]X"));
        let boxr = RuleInstance::new(RuleName::BoxR, Some(lf(&g, 0, "[]X")))
            .with_fresh([Label(1), Label(2)]);
        let mut s2 = s1.clone();
        s2.rel.insert(RelAtom::Pre(Label(0), Label(1)));
        s2.rel.insert(RelAtom::Acc(Label(1), Label(2)));
        s2.right.insert(lf(&g, 2, "X"));
        let regen = RuleInstance::new(RuleName::RegenR, Some(lf(&g, 2, "X")));
        let mut s3 = s2.clone();
        s3.right.insert(lf(&g, 2, goal));
        let fix2 = RuleInstance::new(RuleName::FixR, Some(lf(&g, 2, goal)));
        let mut s4 = s3.clone();
        s4.right.insert(lf(&g, 2, "[]X"));
        let node = |seq: &Sequent, rule: Option<RuleInstance>, premises| ProofNode {
            seq: seq.clone(),
            rule,
            premises,
        };
        let map = [(Label(0), Label(2))].into_iter().collect();
        ProofGraph {
            nodes: vec![
                node(&s0, Some(fix), vec![Premise::Child(1)]),
                node(&s1, Some(boxr), vec![Premise::Child(2)]),
                node(&s2, Some(regen), vec![Premise::Child(3)]),
                node(&s3, Some(fix2), vec![Premise::Child(4)]),
                node(&s4, None, vec![Premise::Back { target: 1, map }]),
            ],
            table: t,
            variant: LogicVariant::CK,
        }
    }

    #[test]
    fn greatest_fixpoint_loop_accepted() {
        let g = single_loop("nu X. []X");
        g.validate(None).unwrap();
        assert_eq!(check_progress(&g).unwrap(), Progress::Accept);
    }

    #[test]
    fn least_fixpoint_loop_rejected() {
        let g = single_loop("mu X. []X");
        g.validate(None).unwrap();
        let Progress::Reject(lasso) = check_progress(&g).unwrap() else {
            panic!("expected a rejection");
        };
        assert_eq!(lasso.stem, vec![0, 1]);
        assert_eq!(lasso.cycle, vec![1, 2, 3, 4, 1]);
    }

    #[test]
    fn acyclic_graphs_accepted() {
        let g = analyze(&parse("p -> p").unwrap()).unwrap();
        let t = g.table().clone();
        let s0 = Sequent::goal(Label(0), t.root());
        let r = RuleInstance::new(RuleName::ImpR, Some(lf(&g, 0, "p -> p"))).with_fresh([Label(1)]);
        let s1 = super::super::rules::apply_rule(&s0, &r, &t, LogicVariant::CK)
            .unwrap()
            .remove(0);
        let graph = ProofGraph {
            nodes: vec![
                ProofNode {
                    seq: s0,
                    rule: Some(r),
                    premises: vec![Premise::Child(1)],
                },
                ProofNode {
                    seq: s1,
                    rule: Some(RuleInstance::new(RuleName::Id, Some(lf(&g, 1, "p")))),
                    premises: vec![],
                },
            ],
            table: t,
            variant: LogicVariant::CK,
        };
        graph.validate(Some(&g)).unwrap();
        assert_eq!(check_progress(&graph).unwrap(), Progress::Accept);
    }

    #[test]
    fn broken_map_reported() {
        let mut g = single_loop("nu X. []X");
        g.nodes[4].premises = vec![Premise::Back {
            target: 1,
            map: [(Label(0), Label(1))].into_iter().collect(),
        }];
        assert!(matches!(
            check_progress(&g),
            Err(ProofError::MalformedTraceMap { node: 4, .. })
        ));
    }

    #[test]
    fn reward_order() {
        assert_eq!(better(2, 3), 2);
        assert_eq!(better(4, 2), 4);
        assert_eq!(better(5, 3), 3);
        assert_eq!(better(1, 6), 6);
    }
}
