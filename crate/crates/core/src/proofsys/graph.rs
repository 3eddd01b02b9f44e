use super::rules::{apply_rule, minors, RuleInstance, RuleName};
use super::sequent::{Label, LabeledFormula, Pos, Sequent, Side};
use crate::model::LogicVariant;
use crate::syntax::{Fixpoint, FormulaTable, Node, WellNamedSentence};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Premise {
    Child(usize),
    /// A back-edge to an ancestor `target` whose sequent, renamed by `map`,
    /// is contained in this node's sequent.
    Back {
        target: usize,
        map: BTreeMap<Label, Label>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofNode {
    pub seq: Sequent,
    /// `None` for a bud, whose only premise is a back-edge.
    pub rule: Option<RuleInstance>,
    pub premises: Vec<Premise>,
}

/// A finite cyclic proof: a tree rooted at node 0, plus back-edges from buds
/// to ancestors.
#[derive(Clone, Debug)]
pub struct ProofGraph {
    pub nodes: Vec<ProofNode>,
    pub table: Arc<FormulaTable>,
    pub variant: LogicVariant,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ProofError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("node {node}: {message}")]
    InvalidStep { node: usize, message: String },
    #[error("node {node}: back-edge map {message}")]
    MalformedTraceMap { node: usize, message: String },
    #[error("progress check gave up after {0} path summaries")]
    ProgressLimit(usize),
}

fn invalid(node: usize, message: impl Into<String>) -> ProofError {
    ProofError::InvalidStep {
        node,
        message: message.into(),
    }
}

/// One trace step across an edge: a position of the source node, a position
/// of the target node, and the step's priority.
pub type Step = (Pos, Pos, u32);

/// Priority of a trace step. Ordinary steps get 1. Regenerating the binder
/// of rank `r` (of `n`) gets `2(n-r)+2` if the trace side makes it
/// progressing, else `2(n-r)+1`; progressing beats non-progressing for the
/// same binder and outer binders dominate inner ones.
pub fn regen_priority(t: &FormulaTable, side: Side, var: crate::syntax::FId) -> u32 {
    let Node::Var { binder, .. } = *t.node(var) else {
        return 1;
    };
    let info = t.binder(binder);
    let n = t.binders().len() as u32;
    let base = 2 * (n - info.rank as u32);
    let good = matches!(
        (info.kind, side),
        (Fixpoint::Nu, Side::Right) | (Fixpoint::Mu, Side::Left)
    );
    if good {
        base + 2
    } else {
        base + 1
    }
}

/// Trace steps from a rule's conclusion `s` into its `k`-th premise `p`.
pub fn rule_steps(
    s: &Sequent,
    r: &RuleInstance,
    k: usize,
    p: &Sequent,
    t: &FormulaTable,
) -> Vec<Step> {
    let mut out: Vec<Step> = s
        .positions()
        .filter(|q| p.contains_pos(q))
        .map(|q| (q, q, 1))
        .collect();
    if r.name == RuleName::BotRel {
        return out;
    }
    if let Some(pp) = r.principal_pos() {
        let prio = match r.name {
            RuleName::RegenL | RuleName::RegenR => regen_priority(t, pp.side, pp.lf.formula),
            _ => 1,
        };
        for m in minors(s, r, k, t) {
            if p.contains_pos(&m) {
                out.push((pp, m, prio));
            }
        }
    }
    out
}

/// Trace steps along a back-edge from a bud `s` to its companion `a`.
pub fn back_steps(s: &Sequent, a: &Sequent, map: &BTreeMap<Label, Label>) -> Vec<Step> {
    a.positions()
        .filter_map(|g| {
            let x = *map.get(&g.lf.label)?;
            let f = Pos {
                side: g.side,
                lf: LabeledFormula::new(x, g.lf.formula),
            };
            s.contains_pos(&f).then_some((f, g, 1))
        })
        .collect()
}

impl ProofGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Tree parent of every node (the root has none).
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for p in &n.premises {
                if let Premise::Child(c) = *p {
                    if c < parent.len() {
                        parent[c] = Some(i);
                    }
                }
            }
        }
        parent
    }

    /// Every edge with its trace steps: `(from, to, steps)`.
    pub fn edges(&self) -> Vec<(usize, usize, Vec<Step>)> {
        let mut out = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            for (k, p) in n.premises.iter().enumerate() {
                match p {
                    Premise::Child(c) => {
                        let r = n.rule.as_ref().expect("child edges come from rule nodes");
                        out.push((
                            i,
                            *c,
                            rule_steps(&n.seq, r, k, &self.nodes[*c].seq, &self.table),
                        ));
                    }
                    Premise::Back { target, map } => {
                        out.push((
                            i,
                            *target,
                            back_steps(&n.seq, &self.nodes[*target].seq, map),
                        ));
                    }
                }
            }
        }
        out
    }

    /// Re-applies every rule and checks the shape of the graph.
    pub fn validate(&self, goal: Option<&WellNamedSentence>) -> Result<(), ProofError> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(invalid(0, "empty proof"));
        }
        if let Some(g) = goal {
            if self.nodes[0].seq != Sequent::goal(Label(0), g.table().root()) {
                return Err(invalid(0, "root is not the goal sequent"));
            }
        }
        let mut parent = vec![None; n];
        for (i, node) in self.nodes.iter().enumerate() {
            for p in &node.premises {
                if let Premise::Child(c) = *p {
                    if c >= n || c == 0 || parent[c].is_some() {
                        return Err(invalid(i, format!("premise {c} is not a fresh child")));
                    }
                    parent[c] = Some(i);
                }
            }
        }
        for c in 1..n {
            let mut seen = 0;
            let mut cur = c;
            while let Some(p) = parent[cur] {
                cur = p;
                seen += 1;
                if seen > n {
                    return Err(invalid(c, "cyclic tree edges"));
                }
            }
            if cur != 0 {
                return Err(invalid(c, "unreachable from the root"));
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match &node.rule {
                Some(r) => {
                    let prem = apply_rule(&node.seq, r, &self.table, self.variant)
                        .map_err(|e| invalid(i, e.to_string()))?;
                    if prem.len() != node.premises.len() {
                        return Err(invalid(
                            i,
                            format!(
                                "{} has {} premise(s), found {}",
                                r.name,
                                prem.len(),
                                node.premises.len()
                            ),
                        ));
                    }
                    for (expected, p) in prem.iter().zip(&node.premises) {
                        let Premise::Child(c) = *p else {
                            return Err(invalid(i, "back-edges must leave from buds"));
                        };
                        if self.nodes[c].seq != *expected {
                            return Err(invalid(
                                c,
                                format!("sequent does not match the premise of {}", r.name),
                            ));
                        }
                    }
                }
                None => {
                    let [Premise::Back { target, map }] = node.premises.as_slice() else {
                        return Err(invalid(i, "open leaf: neither a rule nor a back-edge"));
                    };
                    let mut cur = i;
                    let mut found = false;
                    while let Some(p) = parent[cur] {
                        if p == *target {
                            found = true;
                            break;
                        }
                        cur = p;
                    }
                    if !found {
                        return Err(invalid(
                            i,
                            format!("back-edge target {target} is not a proper ancestor"),
                        ));
                    }
                    check_map(i, &self.nodes[*target].seq, &node.seq, map)?;
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let t = &self.table;
        let mut out = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let premises: Vec<String> = node
                .premises
                .iter()
                .map(|p| match p {
                    Premise::Child(c) => c.to_string(),
                    Premise::Back { target, .. } => format!("^{target}"),
                })
                .collect();
            let (name, principal) = match &node.rule {
                Some(r) => (
                    r.name.as_str(),
                    r.principal.map_or("-".to_string(), |p| p.show(t)),
                ),
                None => ("back", "-".to_string()),
            };
            let _ = write!(
                out,
                "node {i}: {name} principal={principal} premises=[{}] seq=\"{}\"",
                premises.join(","),
                node.seq.show(t)
            );
            if let Some(r) = &node.rule {
                if !r.atoms.is_empty() {
                    let atoms: Vec<String> = r.atoms.iter().map(|a| a.to_string()).collect();
                    let _ = write!(out, " atoms=\"{}\"", atoms.join(", "));
                }
                if !r.fresh.is_empty() {
                    let fresh: Vec<String> = r.fresh.iter().map(|l| l.to_string()).collect();
                    let _ = write!(out, " fresh=\"{}\"", fresh.join(", "));
                }
            }
            if let [Premise::Back { map, .. }] = node.premises.as_slice() {
                let pairs: Vec<String> = map.iter().map(|(a, b)| format!("{a}->{b}")).collect();
                let _ = write!(out, " map=\"{}\"", pairs.join(", "));
            }
            out.push('\n');
        }
        out
    }

    /// Reads the text format against the closure of `goal`. Lines that are
    /// blank or start with `#` are skipped. Node ids must be 0, 1, 2, ...
    pub fn from_text(
        text: &str,
        goal: &WellNamedSentence,
        variant: LogicVariant,
    ) -> Result<ProofGraph, ProofError> {
        let t = goal.table();
        // (line, rule, principal, premises as (is_back, id), sequent, extra fields)
        type Raw = (
            usize,
            Option<RuleName>,
            Option<LabeledFormula>,
            Vec<(bool, usize)>,
            Sequent,
            BTreeMap<String, String>,
        );
        let mut raw: Vec<Raw> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| ProofError::Malformed {
                line: ln + 1,
                message,
            };
            let rest = line
                .strip_prefix("node ")
                .ok_or_else(|| bad("expected 'node <id>:'".into()))?;
            let (id, rest) = rest
                .split_once(": ")
                .ok_or_else(|| bad("expected ':' after the node id".into()))?;
            let id: usize = id.parse().map_err(|_| bad(format!("bad node id {id:?}")))?;
            if id != raw.len() {
                return Err(bad(format!("expected node {}, found {id}", raw.len())));
            }
            let (name, rest) = rest
                .split_once(" principal=")
                .ok_or_else(|| bad("missing principal=".into()))?;
            let rule = if name == "back" {
                None
            } else {
                Some(name.parse::<RuleName>().map_err(bad)?)
            };
            let (principal, rest) = rest
                .split_once(" premises=[")
                .ok_or_else(|| bad("missing premises=[".into()))?;
            let principal = if principal == "-" {
                None
            } else {
                Some(LabeledFormula::parse(principal, t).map_err(bad)?)
            };
            let (prem, rest) = rest
                .split_once(']')
                .ok_or_else(|| bad("unterminated premise list".into()))?;
            let mut premises = Vec::new();
            for p in prem.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (back, num) = match p.strip_prefix('^') {
                    Some(n) => (true, n),
                    None => (false, p),
                };
                premises.push((
                    back,
                    num.parse().map_err(|_| bad(format!("bad premise {p:?}")))?,
                ));
            }
            let mut fields = BTreeMap::new();
            let mut rest = rest.trim();
            while !rest.is_empty() {
                let (key, after) = rest
                    .split_once("=\"")
                    .ok_or_else(|| bad(format!("expected key=\"value\", found {rest:?}")))?;
                let (value, after) = after
                    .split_once('"')
                    .ok_or_else(|| bad(format!("unterminated value for {key}")))?;
                fields.insert(key.trim().to_string(), value.to_string());
                rest = after.trim();
            }
            let seq = Sequent::parse(
                fields.get("seq").ok_or_else(|| bad("missing seq".into()))?,
                t,
            )
            .map_err(bad)?;
            raw.push((ln + 1, rule, principal, premises, seq, fields));
        }
        let n = raw.len();
        let mut nodes = Vec::with_capacity(n);
        for (ln, rule, principal, premises, seq, fields) in &raw {
            let bad = |message: String| ProofError::Malformed { line: *ln, message };
            let mut prem = Vec::new();
            for &(back, k) in premises {
                if k >= n {
                    return Err(bad(format!("premise {k} does not exist")));
                }
                if back {
                    let map = parse_map(fields.get("map").map(String::as_str).unwrap_or(""))
                        .map_err(bad)?;
                    prem.push(Premise::Back { target: k, map });
                } else {
                    prem.push(Premise::Child(k));
                }
            }
            let labels = |key: &str| -> Result<Vec<Label>, ProofError> {
                fields
                    .get(key)
                    .map(|s| {
                        s.split(',')
                            .map(str::trim)
                            .filter(|x| !x.is_empty())
                            .map(|x| Label::parse(x).ok_or_else(|| bad(format!("bad label {x:?}"))))
                            .collect()
                    })
                    .unwrap_or(Ok(Vec::new()))
            };
            let rule = match rule {
                None => None,
                Some(name) => {
                    let atoms = fields
                        .get("atoms")
                        .map(|s| {
                            s.split(", ")
                                .filter(|x| !x.trim().is_empty())
                                .map(|a| {
                                    super::sequent::RelAtom::parse(a.trim())
                                        .ok_or_else(|| bad(format!("bad atom {a:?}")))
                                })
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .unwrap_or(Ok(Vec::new()))?;
                    let mut r = RuleInstance::new(*name, *principal)
                        .with_atoms(atoms)
                        .with_fresh(labels("fresh")?);
                    if *name == RuleName::Wk {
                        let [(false, c)] = premises.as_slice() else {
                            return Err(bad("wk takes one child premise".into()));
                        };
                        r.keep = Some(Box::new(raw[*c].4.clone()));
                    }
                    Some(r)
                }
            };
            nodes.push(ProofNode {
                seq: seq.clone(),
                rule,
                premises: prem,
            });
        }
        let g = ProofGraph {
            nodes,
            table: t.clone(),
            variant,
        };
        g.validate(Some(goal))?;
        Ok(g)
    }
}

fn parse_map(s: &str) -> Result<BTreeMap<Label, Label>, String> {
    let mut map = BTreeMap::new();
    for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, b) = pair
            .split_once("->")
            .ok_or_else(|| format!("bad map entry {pair:?}"))?;
        let a = Label::parse(a).ok_or_else(|| format!("bad label {a:?}"))?;
        let b = Label::parse(b).ok_or_else(|| format!("bad label {b:?}"))?;
        map.insert(a, b);
    }
    Ok(map)
}

pub(crate) fn check_map(
    node: usize,
    target: &Sequent,
    bud: &Sequent,
    map: &BTreeMap<Label, Label>,
) -> Result<(), ProofError> {
    let bad = |message: String| ProofError::MalformedTraceMap { node, message };
    for l in target.labels() {
        if !map.contains_key(&l) {
            return Err(bad(format!("does not map {l}")));
        }
    }
    if !target.rename(map).is_subset(bud) {
        return Err(bad("does not embed the companion into the bud".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{analyze, parse};

    #[test]
    fn priorities_order_binders() {
        let g = analyze(&parse("nu X. mu Y. []X & <>Y").unwrap()).unwrap();
        let t = g.table();
        let x = t
            .ids()
            .find(|&i| matches!(t.node(i), Node::Var { name, .. } if name == "X"))
            .unwrap();
        let y = t
            .ids()
            .find(|&i| matches!(t.node(i), Node::Var { name, .. } if name == "Y"))
            .unwrap();
        assert_eq!(regen_priority(t, Side::Right, x), 6);
        assert_eq!(regen_priority(t, Side::Left, x), 5);
        assert_eq!(regen_priority(t, Side::Left, y), 4);
        assert_eq!(regen_priority(t, Side::Right, y), 3);
    }
}
