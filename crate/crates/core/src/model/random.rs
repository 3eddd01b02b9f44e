use super::{close, ClosureOptions, LogicVariant, Model, ModelDocument, ModelError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub worlds: usize,
    pub pre_density: f64,
    pub rel_density: f64,
    pub fallible_density: f64,
    pub val_density: f64,
    pub props: Vec<String>,
    /// Rejection-sampling attempts before giving up.
    pub max_attempts: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            worlds: 3,
            pre_density: 0.3,
            rel_density: 0.3,
            fallible_density: 0.1,
            val_density: 0.4,
            props: vec!["p".into(), "q".into()],
            max_attempts: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerationError {
    #[error("no valid {variant} model found after {attempts} attempts")]
    GenerationBudgetExceeded {
        variant: LogicVariant,
        attempts: usize,
    },
}

fn sample_document(rng: &mut ChaCha8Rng, p: &RandomParams, variant: LogicVariant) -> ModelDocument {
    let names = Model::default_world_names(p.worlds);
    let mut doc = ModelDocument {
        worlds: names.clone(),
        ..ModelDocument::default()
    };
    for a in &names {
        for b in &names {
            if a != b && rng.gen_bool(p.pre_density) {
                doc.pre.push((a.clone(), b.clone()));
            }
            if rng.gen_bool(p.rel_density) {
                doc.rel.push((a.clone(), b.clone()));
            }
        }
        if variant == LogicVariant::CK && rng.gen_bool(p.fallible_density) {
            doc.fallible.push(a.clone());
        }
    }
    doc.val = p
        .props
        .iter()
        .map(|q| {
            let ws = names
                .iter()
                .filter(|_| rng.gen_bool(p.val_density))
                .cloned()
                .collect();
            (q.clone(), ws)
        })
        .collect::<BTreeMap<_, _>>();
    doc
}

/// A valid model of `variant`, sampled and closed; IK and GK frame conditions
/// are met by rejection. The same seed always yields the same model.
pub fn random_model(
    seed: u64,
    params: &RandomParams,
    variant: LogicVariant,
) -> Result<Model, GenerationError> {
    assert!(params.worlds > 0, "models need at least one world");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..params.max_attempts.max(1) {
        let doc = sample_document(&mut rng, params, variant);
        match close(&doc, ClosureOptions::all(), variant) {
            Ok(m) => return Ok(m),
            Err(ModelError::ValidationFailed(_)) => continue,
            Err(e) => unreachable!("sampled documents are well-formed: {e}"),
        }
    }
    Err(GenerationError::GenerationBudgetExceeded {
        variant,
        attempts: params.max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    #[test]
    fn deterministic_per_seed() {
        let p = RandomParams::default();
        assert_eq!(
            random_model(7, &p, LogicVariant::CK),
            random_model(7, &p, LogicVariant::CK)
        );
    }

    #[test]
    fn variants_validate() {
        let p = RandomParams::default();
        for v in LogicVariant::ALL {
            for seed in 0..50 {
                let m = random_model(seed, &p, v).unwrap();
                assert!(validate(&m, v).is_empty());
            }
        }
    }

    #[test]
    fn zero_density_gives_discrete_frame() {
        let p = RandomParams {
            pre_density: 0.0,
            rel_density: 0.0,
            ..RandomParams::default()
        };
        let m = random_model(3, &p, LogicVariant::CK).unwrap();
        assert!(m.rel().is_empty());
        assert_eq!(m.pre().len(), m.len());
    }

    #[test]
    fn budget_exhaustion_reported() {
        let p = RandomParams {
            worlds: 6,
            pre_density: 0.5,
            rel_density: 0.9,
            max_attempts: 1,
            ..RandomParams::default()
        };
        let failures = (0..20)
            .filter(|&s| random_model(s, &p, LogicVariant::GK).is_err())
            .count();
        assert!(failures > 0);
    }
}
