use super::countermodel::{check_countermodel, extract_countermodel, read_model};
use super::graph::{back_steps, rule_steps, Premise, ProofGraph, ProofNode};
use super::progress::{
    better, check_progress, extend, identity, index_steps, loop_progresses, Progress, StepIndex,
    Summary,
};
use super::rules::{apply_rule, find_axiom, RuleInstance, RuleName};
use super::saturation::{first_in_phase, oldest_generating, Phase};
use super::sequent::{Label, LabelMap, RelAtom, Sequent, Side};
use crate::game::{build_arena, solve};
use crate::model::{LogicVariant, Model};
use crate::syntax::{FId, FormulaTable, WellNamedSentence};
use std::collections::{BTreeSet, HashMap, HashSet};

type Candidate = (usize, LabelMap);

/// Limits on proof search. `nodes` counts every sequent built, including
/// those of abandoned weakening attempts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub nodes: usize,
    pub labels: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            nodes: 20_000,
            labels: 24,
        }
    }
}

/// A countermodel with the designated world, and the refuter's winning moves
/// in the evaluation game as `(position, move)` descriptions.
#[derive(Clone, Debug)]
pub struct Refutation {
    pub model: Model,
    pub world: usize,
    pub moves: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    pub nodes: usize,
    pub max_labels: usize,
    pub reason: String,
    pub unsound_extractions: usize,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Proved(ProofGraph),
    Refuted(Refutation),
    Unknown(SearchReport),
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted(_))
    }
}

const HOMOMORPHISMS_PER_COMPANION: usize = 16;
const HOMOMORPHISM_STEPS: usize = 20_000;
const FOLD_CANDIDATES: usize = 4;

struct SNode {
    seq: Sequent,
    parent: Option<usize>,
    rule: Option<RuleInstance>,
    premises: Vec<Premise>,
    /// Candidate target for back-edges.
    companion: bool,
    /// Labels regenerated since the last checkpoint on the path.
    pending: Vec<Label>,
    /// Trace steps from the parent, indexed by source.
    steps_in: StepIndex,
}

enum Step {
    Children(Vec<usize>),
    Closed,
    Refuted(Box<Refutation>),
    Stuck(String),
}

enum Sub {
    Closed,
    Refuted(Box<Refutation>),
    Open(String),
}

struct Search<'a> {
    goal: &'a WellNamedSentence,
    t: &'a FormulaTable,
    variant: LogicVariant,
    budget: Budget,
    nodes: Vec<SNode>,
    work: usize,
    max_labels: usize,
    unsound: usize,
    failed_wk: HashSet<Sequent>,
}

/// Searches for a cyclic proof of `goal` or a countermodel.
///
/// Rules are applied in phases: non-branching rules without new labels
/// first, then (at a checkpoint) cycle detection, then branching rules, then
/// rules introducing labels, oldest label first. At a checkpoint reached
/// after a regeneration the search tries, in order: a back-edge to an
/// ancestor checkpoint whose cycle has a progressing trace; a countermodel
/// obtained by folding a non-progressing cycle; and a weakening to the
/// labels reachable from a regenerated label, kept only if it closes.
///
/// ```
/// use ckmu::proofsys::{prove, Budget, Verdict};
/// use ckmu::{analyze, parse, LogicVariant};
///
/// let goal = analyze(&parse("nu X. []X").unwrap()).unwrap();
/// assert!(prove(&goal, LogicVariant::CK, Budget::default()).is_proved());
/// let goal = analyze(&parse("p | ~p").unwrap()).unwrap();
/// assert!(prove(&goal, LogicVariant::CK, Budget::default()).is_refuted());
/// ```
pub fn prove(goal: &WellNamedSentence, variant: LogicVariant, budget: Budget) -> Verdict {
    let mut s = Search {
        goal,
        t: goal.table(),
        variant,
        budget,
        nodes: Vec::new(),
        work: 0,
        max_labels: 0,
        unsound: 0,
        failed_wk: HashSet::new(),
    };
    let root = s.push(
        Sequent::goal(Label(0), goal.table().root()),
        None,
        Vec::new(),
    );
    let outcome = s.run(root, false, budget.nodes);
    let reason = match outcome {
        Sub::Refuted(r) => return Verdict::Refuted(*r),
        Sub::Open(reason) => reason,
        Sub::Closed => {
            let g = s.graph();
            match check_progress(&g) {
                Ok(Progress::Accept) => return Verdict::Proved(g),
                Ok(Progress::Reject(_)) => {
                    "a cycle of the closed graph has no progressing trace".to_string()
                }
                Err(e) => e.to_string(),
            }
        }
    };
    Verdict::Unknown(SearchReport {
        nodes: s.work,
        max_labels: s.max_labels,
        reason,
        unsound_extractions: s.unsound,
    })
}

impl Search<'_> {
    fn push(&mut self, seq: Sequent, parent: Option<usize>, pending: Vec<Label>) -> usize {
        self.work += 1;
        self.max_labels = self.max_labels.max(seq.labels().len());
        self.nodes.push(SNode {
            seq,
            parent,
            rule: None,
            premises: Vec::new(),
            companion: false,
            pending,
            steps_in: StepIndex::new(),
        });
        self.nodes.len() - 1
    }

    fn graph(&self) -> ProofGraph {
        ProofGraph {
            nodes: self
                .nodes
                .iter()
                .map(|n| ProofNode {
                    seq: n.seq.clone(),
                    rule: n.rule.clone(),
                    premises: n.premises.clone(),
                })
                .collect(),
            table: self.goal.table().clone(),
            variant: self.variant,
        }
    }

    fn run(&mut self, start: usize, in_wk: bool, limit: usize) -> Sub {
        let mut stack = vec![start];
        let mut open = None;
        while let Some(id) = stack.pop() {
            if self.work >= limit {
                return Sub::Open(format!("node budget of {} exhausted", self.budget.nodes));
            }
            match self.expand(id, in_wk) {
                Step::Children(cs) => stack.extend(cs.into_iter().rev()),
                Step::Closed => {}
                Step::Refuted(r) => return Sub::Refuted(r),
                Step::Stuck(reason) if in_wk => return Sub::Open(reason),
                Step::Stuck(reason) => {
                    open.get_or_insert(reason);
                }
            }
        }
        match open {
            Some(reason) => Sub::Open(reason),
            None => Sub::Closed,
        }
    }

    fn apply(&mut self, id: usize, r: RuleInstance, pending: Vec<Label>) -> Step {
        let prem = apply_rule(&self.nodes[id].seq, &r, self.t, self.variant)
            .expect("search only builds applicable instances");
        let children: Vec<usize> = prem
            .into_iter()
            .map(|s| self.push(s, Some(id), pending.clone()))
            .collect();
        for (k, &c) in children.iter().enumerate() {
            self.nodes[c].steps_in = index_steps(&rule_steps(
                &self.nodes[id].seq,
                &r,
                k,
                &self.nodes[c].seq,
                self.t,
            ));
        }
        self.nodes[id].rule = Some(r);
        self.nodes[id].premises = children.iter().map(|&c| Premise::Child(c)).collect();
        Step::Children(children)
    }

    fn expand(&mut self, id: usize, in_wk: bool) -> Step {
        let seq = self.nodes[id].seq.clone();
        if let Some(ax) = find_axiom(&seq, self.t, self.variant) {
            self.nodes[id].rule = Some(ax);
            return Step::Closed;
        }
        if let Some(w) = first_in_phase(&seq, self.t, self.variant, Phase::Cheap) {
            let mut pending = self.nodes[id].pending.clone();
            if matches!(w.repair.name, RuleName::RegenL | RuleName::RegenR) {
                pending.push(
                    w.repair
                        .principal
                        .expect("regeneration has a principal")
                        .label,
                );
            }
            return self.apply(id, w.repair, pending);
        }
        self.nodes[id].companion = true;
        if !self.nodes[id].pending.is_empty() {
            let (back, folds) = self.find_back_edge(id);
            if let Some((target, map)) = back {
                self.nodes[id].premises = vec![Premise::Back { target, map }];
                return Step::Closed;
            }
            if !in_wk {
                let mut pairs: Vec<LabelMap> = folds.into_iter().map(|(_, map)| map).collect();
                pairs.extend(type_merges(&seq, &self.nodes[id].pending));
                for map in pairs {
                    if let Some(r) = self.try_fold(&seq, &map) {
                        return Step::Refuted(Box::new(r));
                    }
                }
                if self.try_weaken(id) {
                    return Step::Closed;
                }
            }
        }
        if let Some(w) = first_in_phase(&seq, self.t, self.variant, Phase::Branching) {
            return self.apply(id, w.repair, Vec::new());
        }
        if let Some(w) = oldest_generating(&seq, self.t, self.variant) {
            if seq.labels().len() + w.repair.fresh.len() > self.budget.labels {
                return Step::Stuck(format!("label budget of {} exhausted", self.budget.labels));
            }
            return self.apply(id, w.repair, Vec::new());
        }
        if in_wk {
            return Step::Stuck("saturated leaf under weakening".into());
        }
        match extract_countermodel(&seq, self.t, self.variant, Label(0)) {
            Ok((m, w)) => Step::Refuted(Box::new(self.refutation(m, w))),
            Err(e) => {
                self.unsound += 1;
                Step::Stuck(e.to_string())
            }
        }
    }

    /// A progressing back-edge from `id` if one exists, and otherwise a few
    /// non-progressing candidates for folding.
    fn find_back_edge(&self, id: usize) -> (Option<Candidate>, Vec<Candidate>) {
        let s = &self.nodes[id].seq;
        let profile = Profile::new(s);
        let mut folds = Vec::new();
        // summary from the current ancestor down to `id`
        let mut below = identity(s.positions());
        let mut child = id;
        let mut cur = self.nodes[id].parent;
        while let Some(a) = cur {
            below = prepend(&self.nodes[child].steps_in, &below);
            if self.nodes[a].companion {
                for theta in
                    homomorphisms(&self.nodes[a].seq, &profile, HOMOMORPHISMS_PER_COMPANION)
                {
                    let back = index_steps(&back_steps(s, &self.nodes[a].seq, &theta));
                    if loop_progresses(&extend(&below, &back)) {
                        return (Some((a, theta)), folds);
                    }
                    if folds.len() < FOLD_CANDIDATES {
                        folds.push((a, theta));
                    }
                }
            }
            child = a;
            cur = self.nodes[a].parent;
        }
        (None, folds)
    }

    /// Identifies each label with its image under `theta` and checks the
    /// quotient as a countermodel.
    fn try_fold(&self, seq: &Sequent, theta: &LabelMap) -> Option<Refutation> {
        let mut rep: LabelMap = seq.labels().into_iter().map(|l| (l, l)).collect();
        fn find(rep: &LabelMap, mut x: Label) -> Label {
            while rep[&x] != x {
                x = rep[&x];
            }
            x
        }
        for (&x, &y) in theta {
            let (rx, ry) = (find(&rep, x), find(&rep, y));
            if rx != ry {
                rep.insert(rx.max(ry), rx.min(ry));
            }
        }
        let map: LabelMap = rep.keys().map(|&l| (l, find(&rep, l))).collect();
        let q = seq.rename(&map);
        let m = read_model(&q, self.t, self.variant).ok()?;
        let world = m.world_index(&map[&Label(0)].to_string())?;
        check_countermodel(&m, world, self.goal.formula()).ok()?;
        Some(self.refutation(m, world))
    }

    /// Tries closing `id` through `wk` to the labels reachable from a
    /// regenerated label. Abandoned attempts are removed.
    fn try_weaken(&mut self, id: usize) -> bool {
        let seq = self.nodes[id].seq.clone();
        let all = seq.labels().len();
        let mut zs = self.nodes[id].pending.clone();
        zs.reverse();
        let mut tried = BTreeSet::new();
        for z in zs {
            if !tried.insert(z) {
                continue;
            }
            let cone = forward_cone(&seq, z);
            if cone.len() == all {
                continue;
            }
            let keep = seq.restrict(&cone);
            if self.failed_wk.contains(&keep) {
                continue;
            }
            let mark = self.nodes.len();
            let w = self.push(keep.clone(), Some(id), Vec::new());
            self.nodes[w].companion = true;
            let r = RuleInstance::weakening(keep.clone());
            self.nodes[w].steps_in = index_steps(&rule_steps(&seq, &r, 0, &keep, self.t));
            self.nodes[id].rule = Some(r);
            self.nodes[id].premises = vec![Premise::Child(w)];
            let slice = (self.budget.nodes / 8).max(200);
            let limit = (self.work + slice).min(self.budget.nodes);
            if let Sub::Closed = self.run(w, true, limit) {
                return true;
            }
            self.nodes.truncate(mark);
            self.nodes[id].rule = None;
            self.nodes[id].premises.clear();
            self.failed_wk.insert(keep);
        }
        false
    }

    fn refutation(&self, model: Model, world: usize) -> Refutation {
        let mut moves = Vec::new();
        if let Ok(arena) = build_arena(&model, self.goal, world) {
            let sol = solve(&arena);
            for (&from, &to) in &sol.strategy_ii.choice {
                moves.push((arena.describe(from), arena.describe(to)));
            }
        }
        Refutation {
            model,
            world,
            moves,
        }
    }
}

/// Merges of a regenerated label into an older label carrying the same
/// formulas on both sides, one per pair, then all such merges at once.
fn type_merges(s: &Sequent, pending: &[Label]) -> Vec<LabelMap> {
    let profile = Profile::new(s);
    let mut out = Vec::new();
    let mut all = LabelMap::new();
    for &z in pending.iter().rev() {
        if let Some(&x) = profile
            .labels
            .iter()
            .find(|&&x| x < z && profile.at[&x] == profile.at[&z])
        {
            out.push(LabelMap::from([(z, x)]));
            all.insert(z, x);
        }
    }
    for &z in &profile.labels {
        if let Some(&x) = profile
            .labels
            .iter()
            .find(|&&x| x < z && profile.at[&x] == profile.at[&z])
        {
            all.insert(z, x);
        }
    }
    if all.len() > 1 {
        out.push(all);
    }
    out.truncate(FOLD_CANDIDATES);
    out
}

/// `steps` followed by `s`.
fn prepend(steps: &StepIndex, s: &Summary) -> Summary {
    let mut by_src: StepIndex = StepIndex::new();
    for (&(m, b), &p) in s {
        by_src.entry(m).or_default().push((b, p));
    }
    let mut out = Summary::new();
    for (&a, next) in steps {
        for &(m, q) in next {
            for &(b, p) in by_src.get(&m).into_iter().flatten() {
                let v = p.max(q);
                out.entry((a, b))
                    .and_modify(|w| *w = better(*w, v))
                    .or_insert(v);
            }
        }
    }
    out
}

fn forward_cone(s: &Sequent, z: Label) -> BTreeSet<Label> {
    let mut seen = BTreeSet::from([z]);
    let mut stack = vec![z];
    while let Some(x) = stack.pop() {
        for y in s.pre_succ(x).chain(s.acc_succ(x)) {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen
}

/// Per-label formula sets of a sequent, for homomorphism search.
struct Profile<'a> {
    seq: &'a Sequent,
    labels: Vec<Label>,
    at: HashMap<Label, (BTreeSet<FId>, BTreeSet<FId>)>,
}

impl<'a> Profile<'a> {
    fn new(seq: &'a Sequent) -> Self {
        let labels: Vec<Label> = seq.labels().into_iter().collect();
        let at = labels
            .iter()
            .map(|&l| {
                (
                    l,
                    (
                        seq.at(Side::Left, l).collect(),
                        seq.at(Side::Right, l).collect(),
                    ),
                )
            })
            .collect();
        Profile { seq, labels, at }
    }
}

/// Label maps `θ` other than the identity with `θ(a) ⊆ s`.
fn homomorphisms(a: &Sequent, s: &Profile, limit: usize) -> Vec<LabelMap> {
    let pa = Profile::new(a);
    let la = &pa.labels;
    let cands: Vec<Vec<Label>> = la
        .iter()
        .map(|x| {
            let (l, r) = &pa.at[x];
            s.labels
                .iter()
                .copied()
                .filter(|y| {
                    let (sl, sr) = &s.at[y];
                    l.is_subset(sl) && r.is_subset(sr)
                })
                .collect()
        })
        .collect();
    if cands.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let pos: HashMap<Label, usize> = la.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    // atoms checked once both ends are assigned
    let mut due: Vec<Vec<RelAtom>> = vec![Vec::new(); la.len()];
    for atom in a.rel.iter() {
        let [x, y] = atom.labels();
        due[pos[&x].max(pos[&y])].push(*atom);
    }
    let mut h = Homs {
        la,
        cands: &cands,
        due: &due,
        pos: &pos,
        s: s.seq,
        assign: Vec::with_capacity(la.len()),
        out: Vec::new(),
        steps: 0,
        limit,
    };
    h.go(0);
    h.out
}

struct Homs<'a> {
    la: &'a [Label],
    cands: &'a [Vec<Label>],
    due: &'a [Vec<RelAtom>],
    pos: &'a HashMap<Label, usize>,
    s: &'a Sequent,
    assign: Vec<Label>,
    out: Vec<LabelMap>,
    steps: usize,
    limit: usize,
}

impl Homs<'_> {
    fn go(&mut self, i: usize) {
        if self.out.len() >= self.limit || self.steps > HOMOMORPHISM_STEPS {
            return;
        }
        if i == self.la.len() {
            if self.la.iter().zip(&self.assign).any(|(x, y)| x != y) {
                self.out.push(
                    self.la
                        .iter()
                        .copied()
                        .zip(self.assign.iter().copied())
                        .collect(),
                );
            }
            return;
        }
        for &y in &self.cands[i] {
            self.steps += 1;
            self.assign.push(y);
            let ok = self.due[i].iter().all(|atom| {
                self.s
                    .rel
                    .contains(&atom.map(|l| self.assign[self.pos[&l]]))
            });
            if ok {
                self.go(i + 1);
            }
            self.assign.pop();
        }
    }
}
