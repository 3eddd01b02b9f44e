use super::Formula;
use std::collections::HashMap;
use std::fmt;

/// Index of a formula in a [`FormulaTable`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FId(pub u32);

impl FId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for FId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fixpoint {
    Mu,
    Nu,
}

/// One interned formula with its immediate subformulas resolved to ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Prop(String),
    Var {
        name: String,
        binder: FId,
    },
    Bottom,
    And(FId, FId),
    Or(FId, FId),
    Implies(FId, FId),
    Box(FId),
    Dia(FId),
    Fix {
        kind: Fixpoint,
        var: String,
        body: FId,
    },
    LocalDia(FId),
    Query(FId, FId),
}

/// Per-binder facts used by the game and the prover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinderInfo {
    pub id: FId,
    pub kind: Fixpoint,
    /// Position in the subsumption order, 0 for the outermost.
    pub rank: usize,
    /// Whether the number of implication antecedents crossed on the way from
    /// the root is even.
    pub even_antecedents: bool,
}

/// The closure of a well-named sentence, interned: subformulas plus the local
/// diamond of every diamond and the query of every implication.
#[derive(Clone, Debug)]
pub struct FormulaTable {
    nodes: Vec<Node>,
    formulas: Vec<Formula>,
    index: HashMap<Formula, FId>,
    root: FId,
    binders: Vec<BinderInfo>,
    binder_slot: HashMap<FId, usize>,
    local_dia: HashMap<FId, FId>,
    query: HashMap<FId, FId>,
}

impl FormulaTable {
    /// Builds the table. `order` lists the fixpoint subformulas outermost
    /// first; variable names are assumed unique.
    pub(crate) fn build(root: &Formula, order: &[Formula]) -> Self {
        let mut t = FormulaTable {
            nodes: Vec::new(),
            formulas: Vec::new(),
            index: HashMap::new(),
            root: FId(0),
            binders: Vec::new(),
            binder_slot: HashMap::new(),
            local_dia: HashMap::new(),
            query: HashMap::new(),
        };
        t.root = t.intern(root);
        let mut by_var = HashMap::new();
        for (i, f) in t.formulas.iter().enumerate() {
            if let Formula::Mu(x, _) | Formula::Nu(x, _) = f {
                by_var.insert(x.clone(), FId(i as u32));
            }
        }
        for n in t.nodes.iter_mut() {
            if let Node::Var { name, binder } = n {
                if let Some(b) = by_var.get(name) {
                    *binder = *b;
                }
            }
        }
        let mut parity = HashMap::new();
        t.antecedent_parity(t.root, true, &mut parity);
        for (rank, f) in order.iter().enumerate() {
            let id = t.id(f).expect("binder interned");
            let kind = f.as_fixpoint().expect("fixpoint").0;
            t.binder_slot.insert(id, rank);
            t.binders.push(BinderInfo {
                id,
                kind,
                rank,
                even_antecedents: *parity.get(&id).unwrap_or(&true),
            });
        }
        t
    }

    fn antecedent_parity(&self, id: FId, even: bool, out: &mut HashMap<FId, bool>) {
        match self.node(id) {
            Node::Fix { body, .. } => {
                out.insert(id, even);
                self.antecedent_parity(*body, even, out);
            }
            Node::Implies(l, r) | Node::Query(l, r) => {
                self.antecedent_parity(*l, !even, out);
                self.antecedent_parity(*r, even, out);
            }
            Node::And(l, r) | Node::Or(l, r) => {
                self.antecedent_parity(*l, even, out);
                self.antecedent_parity(*r, even, out);
            }
            Node::Box(g) | Node::Dia(g) | Node::LocalDia(g) => {
                self.antecedent_parity(*g, even, out)
            }
            Node::Prop(_) | Node::Var { .. } | Node::Bottom => {}
        }
    }

    fn push(&mut self, f: &Formula, node: Node) -> FId {
        if let Some(&id) = self.index.get(f) {
            return id;
        }
        let id = FId(self.nodes.len() as u32);
        self.nodes.push(node);
        self.formulas.push(f.clone());
        self.index.insert(f.clone(), id);
        id
    }

    fn intern(&mut self, f: &Formula) -> FId {
        if let Some(&id) = self.index.get(f) {
            return id;
        }
        match f {
            Formula::Prop(p) => self.push(f, Node::Prop(p.clone())),
            Formula::Var(x) => self.push(
                f,
                Node::Var {
                    name: x.clone(),
                    binder: FId(u32::MAX),
                },
            ),
            Formula::Bottom => self.push(f, Node::Bottom),
            Formula::And(l, r) => {
                let (l, r) = (self.intern(l), self.intern(r));
                self.push(f, Node::And(l, r))
            }
            Formula::Or(l, r) => {
                let (l, r) = (self.intern(l), self.intern(r));
                self.push(f, Node::Or(l, r))
            }
            Formula::Implies(a, b) => {
                let (l, r) = (self.intern(a), self.intern(b));
                let id = self.push(f, Node::Implies(l, r));
                let q = Formula::Query(a.clone(), b.clone());
                let qid = self.push(&q, Node::Query(l, r));
                self.query.insert(id, qid);
                id
            }
            Formula::Query(l, r) => {
                let (l, r) = (self.intern(l), self.intern(r));
                self.push(f, Node::Query(l, r))
            }
            Formula::Box(g) => {
                let g = self.intern(g);
                self.push(f, Node::Box(g))
            }
            Formula::Dia(g) => {
                let gid = self.intern(g);
                let id = self.push(f, Node::Dia(gid));
                let ld = Formula::LocalDia(g.clone());
                let lid = self.push(&ld, Node::LocalDia(gid));
                self.local_dia.insert(id, lid);
                id
            }
            Formula::LocalDia(g) => {
                let g = self.intern(g);
                self.push(f, Node::LocalDia(g))
            }
            Formula::Mu(x, b) | Formula::Nu(x, b) => {
                let body = self.intern(b);
                let kind = if matches!(f, Formula::Mu(..)) {
                    Fixpoint::Mu
                } else {
                    Fixpoint::Nu
                };
                self.push(
                    f,
                    Node::Fix {
                        kind,
                        var: x.clone(),
                        body,
                    },
                )
            }
        }
    }

    pub fn root(&self) -> FId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = FId> {
        (0..self.nodes.len() as u32).map(FId)
    }

    pub fn node(&self, id: FId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn formula(&self, id: FId) -> &Formula {
        &self.formulas[id.index()]
    }

    pub fn id(&self, f: &Formula) -> Option<FId> {
        self.index.get(f).copied()
    }

    /// The local diamond paired with a diamond.
    pub fn local_dia_of(&self, dia: FId) -> FId {
        self.local_dia[&dia]
    }

    /// The query paired with an implication.
    pub fn query_of(&self, imp: FId) -> FId {
        self.query[&imp]
    }

    /// Binders in subsumption order, outermost first.
    pub fn binders(&self) -> &[BinderInfo] {
        &self.binders
    }

    pub fn binder(&self, fix: FId) -> &BinderInfo {
        &self.binders[self.binder_slot[&fix]]
    }

    /// The binder of a variable node.
    pub fn binder_of_var(&self, var: FId) -> Option<FId> {
        match self.node(var) {
            Node::Var { binder, .. } if binder.0 != u32::MAX => Some(*binder),
            _ => None,
        }
    }
}
