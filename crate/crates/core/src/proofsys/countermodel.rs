use super::rules::find_axiom;
use super::saturation::{is_saturated, Witness};
use super::sequent::{Label, Sequent};
use crate::denotational::eval;
use crate::model::{close, ClosureOptions, Env, LogicVariant, Model, ModelDocument};
use crate::syntax::{Formula, FormulaTable, Node};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("sequent is not saturated: {}", .0.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("; "))]
    SequentNotSaturated(Vec<Witness>),
    #[error("sequent is an axiom")]
    Axiom,
    #[error("extracted structure is not a {variant} model: {message}")]
    NotAModel {
        variant: LogicVariant,
        message: String,
    },
    #[error("extracted model does not falsify the goal at {world}")]
    ExtractionUnsound { world: String },
}

/// Reads a model off a sequent: worlds are labels, `⪯` and `R` are the
/// relational atoms, `W⊥` and `V(P)` are read from the left-hand side. The
/// closures of [`close`] then restore reflexivity and heredity.
pub fn read_model(
    s: &Sequent,
    t: &FormulaTable,
    variant: LogicVariant,
) -> Result<Model, ExtractError> {
    let name = |l: Label| l.to_string();
    let labels = s.labels();
    let mut doc = ModelDocument {
        worlds: labels.iter().map(|&l| name(l)).collect(),
        ..ModelDocument::default()
    };
    let mut val: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for id in t.ids() {
        if let Node::Prop(p) = t.node(id) {
            val.insert(p.clone(), Vec::new());
        }
    }
    for lf in s.left.iter() {
        match t.node(lf.formula) {
            Node::Prop(p) => val
                .get_mut(p)
                .expect("props are interned")
                .push(name(lf.label)),
            Node::Bottom => doc.fallible.push(name(lf.label)),
            _ => {}
        }
    }
    for (x, y) in s.pre_atoms() {
        doc.pre.push((name(x), name(y)));
    }
    for (x, y) in s.acc_atoms() {
        doc.rel.push((name(x), name(y)));
    }
    doc.val = val;
    close(&doc, ClosureOptions::all(), variant).map_err(|e| ExtractError::NotAModel {
        variant,
        message: e.to_string(),
    })
}

/// Confirms that `goal` fails at `world`.
pub fn check_countermodel(m: &Model, world: usize, goal: &Formula) -> Result<(), ExtractError> {
    let truth = eval(m, goal, &Env::new()).expect("sentences evaluate on finite models");
    if truth.contains(world) {
        return Err(ExtractError::ExtractionUnsound {
            world: m.world_name(world).to_string(),
        });
    }
    Ok(())
}

/// Extracts a countermodel from a saturated, non-axiomatic sequent and checks
/// that the goal of `t` fails at label `root`. Returns the model and the
/// designated world.
pub fn extract_countermodel(
    s: &Sequent,
    t: &FormulaTable,
    variant: LogicVariant,
    root: Label,
) -> Result<(Model, usize), ExtractError> {
    if find_axiom(s, t, variant).is_some() {
        return Err(ExtractError::Axiom);
    }
    let w = is_saturated(s, t, variant);
    if !w.is_empty() {
        return Err(ExtractError::SequentNotSaturated(w));
    }
    let m = read_model(s, t, variant)?;
    let world = m
        .world_index(&root.to_string())
        .expect("root label is a world");
    check_countermodel(&m, world, t.formula(t.root()))?;
    Ok((m, world))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proofsys::sequent::{LabeledFormula, RelAtom};
    use crate::syntax::{analyze, parse};

    #[test]
    fn bare_proposition() {
        let g = analyze(&parse("p").unwrap()).unwrap();
        let t = g.table();
        let s = Sequent::goal(Label(0), t.root());
        let (m, w) = extract_countermodel(&s, t, LogicVariant::CK, Label(0)).unwrap();
        assert_eq!(m.len(), 1);
        assert!(!m.val("p").contains(w));
    }

    #[test]
    fn excluded_middle_leaf() {
        let g = analyze(&parse("p | ~p").unwrap()).unwrap();
        let t = g.table();
        let id = |f: &str| t.id(&parse(f).unwrap()).unwrap();
        let mut s = Sequent::goal(Label(0), t.root());
        for f in ["p", "~p"] {
            s.right.insert(LabeledFormula::new(Label(0), id(f)));
        }
        s.rel.insert(RelAtom::Pre(Label(0), Label(1)));
        s.left.insert(LabeledFormula::new(Label(1), id("p")));
        s.right.insert(LabeledFormula::new(Label(1), id("false")));
        let (m, w) = extract_countermodel(&s, t, LogicVariant::CK, Label(0)).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.names_of(&m.val("p")), vec!["x1"]);
        assert_eq!(m.world_name(w), "x0");
    }

    #[test]
    fn unsaturated_rejected() {
        let g = analyze(&parse("p & q").unwrap()).unwrap();
        let t = g.table();
        let s = Sequent::goal(Label(0), t.root());
        assert!(matches!(
            extract_countermodel(&s, t, LogicVariant::CK, Label(0)),
            Err(ExtractError::SequentNotSaturated(_))
        ));
    }
}
