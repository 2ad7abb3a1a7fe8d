//! Counterfactual-style explainer: sample random edits, keep those that
//! cross the decision boundary, and report the smallest crossing edit.

use crate::blackbox::LogisticModel;
use crate::counterfactual::{distance, DistanceMetric};
use crate::dataset::{FeatureKind, FeatureSchema, Instance};
use crate::error::Result;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionBoundaryConfig {
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for DecisionBoundaryConfig {
    fn default() -> Self {
        DecisionBoundaryConfig {
            n_samples: 200,
            seed: 0,
        }
    }
}

/// Sample `n_samples` random edits (random feature subset, values redrawn
/// uniformly), keep those whose predicted label flips, and pick the one
/// with the fewest edited features, ties by Euclidean distance. The edited
/// feature set is truncated or padded to `l` by omission-score order. If no
/// sample flips, fall back to [`omission_explain`](super::omission_explain).
pub fn decision_boundary_explain(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
    l: usize,
    cfg: &DecisionBoundaryConfig,
) -> Result<super::Explanation> {
    let m = schema.feature_count();
    super::check_l(l, m)?;
    let rep = schema.encode(instance)?;
    let original_label = model.predict(&rep)?.label;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // (edit count, distance, edited indices) of the best flipping sample
    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    let mut subset = Vec::with_capacity(m);
    for _ in 0..cfg.n_samples {
        subset.clear();
        for j in 0..m {
            if rng.random_bool(0.5) {
                subset.push(j);
            }
        }
        if subset.is_empty() {
            subset.push(rng.random_range(0..m));
        }
        let mut values = instance.values.clone();
        for &j in &subset {
            let n_values = match &schema.feature(j).kind {
                FeatureKind::Categorical { vocabulary } => vocabulary.len(),
                FeatureKind::Embedded { tokens, .. } => tokens.len(),
            };
            values[j] = rng.random_range(0..n_values);
        }
        let edited: Vec<usize> = (0..m).filter(|&j| values[j] != instance.values[j]).collect();
        if edited.is_empty() {
            continue;
        }
        let candidate = Instance::new(values);
        let cand_rep = schema.encode(&candidate)?;
        if model.predict(&cand_rep)?.label == original_label {
            continue;
        }
        let dist = distance(&rep, &cand_rep, DistanceMetric::Euclidean)?;
        let better = match &best {
            None => true,
            Some((count, best_dist, _)) => {
                edited.len() < *count || (edited.len() == *count && dist < *best_dist)
            }
        };
        if better {
            best = Some((edited.len(), dist, edited));
        }
    }

    let Some((_, _, edit_set)) = best else {
        return omission_fallback(model, schema, instance, l);
    };

    // order everything by omission score so truncation and padding are
    // deterministic and informative
    let scores = super::omission_scores(model, schema, instance)?;
    let by_score = super::rank_descending(&scores);
    let mut chosen: Vec<usize> = by_score
        .iter()
        .copied()
        .filter(|j| edit_set.contains(j))
        .take(l)
        .collect();
    if chosen.len() < l {
        for &j in &by_score {
            if !chosen.contains(&j) {
                chosen.push(j);
                if chosen.len() == l {
                    break;
                }
            }
        }
    }
    let chosen_scores = chosen.iter().map(|&j| scores[j]).collect();
    super::Explanation::with_scores(chosen, chosen_scores, m)
}

fn omission_fallback(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
    l: usize,
) -> Result<super::Explanation> {
    super::omission_explain(model, schema, instance, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize, SyntheticSpec};
    use crate::explainers::omission_explain;

    #[test]
    fn constant_model_falls_back_to_omission() {
        let (ds, _) = synthesize(&SyntheticSpec::categorical(4, 3, 5, 0.0), 1).unwrap();
        let zero = LogisticModel::new(vec![0.0; ds.schema().width()], 0.0).unwrap();
        let cfg = DecisionBoundaryConfig {
            n_samples: 50,
            seed: 5,
        };
        for inst in ds.instances() {
            let db = decision_boundary_explain(&zero, ds.schema(), inst, 2, &cfg).unwrap();
            let om = omission_explain(&zero, ds.schema(), inst, 2).unwrap();
            assert_eq!(db.feature_indices(), om.feature_indices());
        }
    }

    #[test]
    fn boundary_adjacent_feature_is_found() {
        // only feature 1 carries weight, and exactly one of its values flips
        // the label, so every flipping sample must edit it
        let (ds, _) = synthesize(&SyntheticSpec::categorical(3, 2, 1, 0.0), 2).unwrap();
        let schema = ds.schema();
        let mut weights = vec![0.0; schema.width()];
        let span = schema.span(1);
        weights[span.start] = 1.0;
        weights[span.start + 1] = -1.0;
        let model = LogisticModel::new(weights, 0.0).unwrap();
        let inst = &ds.instances()[0];
        let mut hits = 0;
        for seed in 0..100 {
            let cfg = DecisionBoundaryConfig {
                n_samples: 100,
                seed,
            };
            let e = decision_boundary_explain(&model, schema, inst, 1, &cfg).unwrap();
            hits += usize::from(e.contains(1));
        }
        assert!(hits >= 95, "found boundary feature {hits}/100");
    }

    #[test]
    fn same_seed_gives_identical_explanation() {
        let (ds, model) = synthesize(&SyntheticSpec::categorical(5, 3, 4, 1.5), 9).unwrap();
        let cfg = DecisionBoundaryConfig {
            n_samples: 80,
            seed: 21,
        };
        for inst in ds.instances() {
            let a = decision_boundary_explain(&model, ds.schema(), inst, 2, &cfg).unwrap();
            let b = decision_boundary_explain(&model, ds.schema(), inst, 2, &cfg).unwrap();
            assert_eq!(a.feature_indices(), b.feature_indices());
        }
    }
}
