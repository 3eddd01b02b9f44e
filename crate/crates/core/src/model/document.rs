use super::{validate, LogicVariant, Model, Relation, Violation};
use crate::worldset::WorldSet;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// The JSON model document, before any closure or validation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub fallible: Vec<String>,
    #[serde(default)]
    pub pre: Vec<(String, String)>,
    #[serde(default)]
    pub rel: Vec<(String, String)>,
    #[serde(default)]
    pub val: BTreeMap<String, Vec<String>>,
}

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClosureOptions {
    pub pre: bool,
    pub heredity: bool,
    pub fallible: bool,
}

impl ClosureOptions {
    pub fn all() -> Self {
        ClosureOptions {
            pre: true,
            heredity: true,
            fallible: true,
        }
    }

    pub fn none() -> Self {
        ClosureOptions::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a model needs at least one world")]
    NoWorlds,
    #[error("duplicate world {0:?}")]
    DuplicateWorld(String),
    #[error("unknown world {0:?}")]
    UnknownWorld(String),
    #[error("invalid JSON model document: {0}")]
    Json(String),
    #[error("model violates {} condition(s): {}", .0.len(), .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    ValidationFailed(Vec<Violation>),
}

/// Builds a model from a document, applying the requested closures, then
/// validates it for `variant`.
///
/// Closures run in the order: preorder, fallible worlds (under `⪯` and `R`,
/// then into every `V(P)`), heredity.
pub fn close(
    doc: &ModelDocument,
    options: ClosureOptions,
    variant: LogicVariant,
) -> Result<Model, ModelError> {
    if doc.worlds.is_empty() {
        return Err(ModelError::NoWorlds);
    }
    let n = doc.worlds.len();
    let mut index = HashMap::new();
    for (i, w) in doc.worlds.iter().enumerate() {
        if index.insert(w.clone(), i).is_some() {
            return Err(ModelError::DuplicateWorld(w.clone()));
        }
    }
    let lookup = |w: &String| {
        index
            .get(w)
            .copied()
            .ok_or_else(|| ModelError::UnknownWorld(w.clone()))
    };
    let pairs = |ps: &[(String, String)]| -> Result<Relation, ModelError> {
        let mut r = Relation::empty(n);
        for (a, b) in ps {
            r.insert(lookup(a)?, lookup(b)?);
        }
        Ok(r)
    };
    let mut pre = pairs(&doc.pre)?;
    let rel = pairs(&doc.rel)?;
    let mut fallible = WorldSet::empty(n);
    for w in &doc.fallible {
        fallible.insert(lookup(w)?);
    }
    let mut val = BTreeMap::new();
    for (p, ws) in &doc.val {
        let mut set = WorldSet::empty(n);
        for w in ws {
            set.insert(lookup(w)?);
        }
        val.insert(p.clone(), set);
    }

    if options.pre {
        pre = pre.reflexive_transitive_closure();
    }
    if options.fallible {
        let mut frontier: Vec<usize> = fallible.iter().collect();
        while let Some(w) = frontier.pop() {
            for v in pre.successors(w).union(rel.successors(w)).iter() {
                if fallible.insert(v) {
                    frontier.push(v);
                }
            }
        }
        for set in val.values_mut() {
            set.union_with(&fallible);
        }
    }
    if options.heredity {
        for set in val.values_mut() {
            let mut up = set.clone();
            for w in set.iter() {
                up.union_with(pre.successors(w));
            }
            // one pass suffices only for transitive pre; iterate otherwise
            while up != *set {
                *set = up.clone();
                for w in set.iter() {
                    up.union_with(pre.successors(w));
                }
            }
        }
    }
    let m = Model::from_parts(doc.worlds.clone(), fallible, pre, rel, val);
    let report = validate(&m, variant);
    if report.is_empty() {
        Ok(m)
    } else {
        Err(ModelError::ValidationFailed(report))
    }
}

impl Model {
    /// The explicit document of this model; closing it again is the identity.
    pub fn to_document(&self) -> ModelDocument {
        let name = |w: usize| self.world_name(w).to_string();
        let rel_pairs = |r: &Relation| -> Vec<(String, String)> {
            r.pairs().map(|(a, b)| (name(a), name(b))).collect()
        };
        ModelDocument {
            worlds: self.worlds().to_vec(),
            fallible: self.fallible().iter().map(name).collect(),
            pre: rel_pairs(self.pre()),
            rel: rel_pairs(self.rel()),
            val: self
                .valuation()
                .iter()
                .map(|(p, s)| (p.clone(), s.iter().map(name).collect()))
                .collect(),
        }
    }
}
