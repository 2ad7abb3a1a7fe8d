//! Feature-attribution explainers behind a single contract: given a model
//! and an instance, return exactly L distinct feature indices.
//!
//! All explainers are deterministic under a fixed seed. Randomized ones
//! derive one RNG stream per `(seed, explainer tag, instance index)`, so a
//! result never depends on evaluation order or on which other explainers
//! ran.

mod decision_boundary;
mod lime;

pub use decision_boundary::{decision_boundary_explain, DecisionBoundaryConfig};
pub use lime::{lime_explain, LimeConfig};

use crate::blackbox::{ground_truth_features, LogisticModel};
use crate::dataset::{Dataset, FeatureSchema, Instance};
use crate::error::{io_err, Error, Result};
use crate::metrics::{erase_indices, RemovalMode};
use crate::seed::derive_seed;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::Path;

/// A subset of an instance's own features, optionally with per-feature
/// attribution scores aligned to the indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    feature_indices: Vec<usize>,
    scores: Option<Vec<f64>>,
}

impl Explanation {
    pub fn new(feature_indices: Vec<usize>, feature_count: usize) -> Result<Self> {
        Self::build(feature_indices, None, feature_count)
    }

    pub fn with_scores(
        feature_indices: Vec<usize>,
        scores: Vec<f64>,
        feature_count: usize,
    ) -> Result<Self> {
        if scores.len() != feature_indices.len() {
            return Err(Error::DimensionMismatch {
                expected: feature_indices.len(),
                got: scores.len(),
            });
        }
        Self::build(feature_indices, Some(scores), feature_count)
    }

    fn build(
        feature_indices: Vec<usize>,
        scores: Option<Vec<f64>>,
        feature_count: usize,
    ) -> Result<Self> {
        if feature_indices.is_empty() {
            return Err(Error::Schema("explanation selects no features".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &j in &feature_indices {
            if j >= feature_count {
                return Err(Error::Schema(format!(
                    "explanation index {j} outside 0..{feature_count}"
                )));
            }
            if !seen.insert(j) {
                return Err(Error::Schema(format!("explanation repeats index {j}")));
            }
        }
        Ok(Explanation {
            feature_indices,
            scores,
        })
    }

    pub fn feature_indices(&self) -> &[usize] {
        &self.feature_indices
    }

    pub fn scores(&self) -> Option<&[f64]> {
        self.scores.as_deref()
    }

    pub fn len(&self) -> usize {
        self.feature_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feature_indices.is_empty()
    }

    pub fn contains(&self, feature: usize) -> bool {
        self.feature_indices.contains(&feature)
    }
}

/// The explainer contract of the evaluation harness.
pub trait Explainer: Send + Sync {
    fn name(&self) -> &str;

    /// Explain one instance; `instance_index` pins the RNG stream for
    /// randomized explainers.
    fn explain(
        &self,
        model: &LogisticModel,
        schema: &FeatureSchema,
        instance: &Instance,
        instance_index: usize,
        l: usize,
    ) -> Result<Explanation>;
}

fn check_l(l: usize, m: usize) -> Result<()> {
    if l == 0 || l > m {
        return Err(Error::Config(format!("explanation size {l} outside 1..={m}")));
    }
    Ok(())
}

/// Uniform sample of `l` distinct feature indices.
pub fn random_explain(instance: &Instance, l: usize, seed: u64) -> Result<Explanation> {
    let m = instance.values.len();
    check_l(l, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, m, l).into_vec();
    Explanation::new(picked, m)
}

/// Score each feature by the probability drop from zeroing its span and
/// keep the top `l`, ties toward the lower index.
pub fn omission_explain(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
    l: usize,
) -> Result<Explanation> {
    let m = schema.feature_count();
    check_l(l, m)?;
    let scores = omission_scores(model, schema, instance)?;
    let order = rank_descending(&scores);
    let top: Vec<usize> = order[..l].to_vec();
    let top_scores = top.iter().map(|&j| scores[j]).collect();
    Explanation::with_scores(top, top_scores, m)
}

/// `p(yhat | x) - p(yhat | x with feature j's span zeroed)` for every j.
pub(crate) fn omission_scores(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
) -> Result<Vec<f64>> {
    let rep = schema.encode(instance)?;
    let pred = model.predict(&rep)?;
    let y = pred.label as usize;
    (0..schema.feature_count())
        .map(|j| {
            let erased = erase_indices(&rep, &[j], RemovalMode::Delete, schema);
            Ok(pred.probs[y] - model.predict(&erased)?.probs[y])
        })
        .collect()
}

/// Indices sorted by score descending, ties toward the lower index.
pub(crate) fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("finite scores")
            .then(a.cmp(&b))
    });
    order
}

/// The whitebox explaining itself: identical to the gold standard.
pub fn whitebox_self_explain(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
    l: usize,
) -> Result<Explanation> {
    ground_truth_features(model, schema, instance, l)
}

pub struct RandomExplainer {
    pub seed: u64,
}

impl Explainer for RandomExplainer {
    fn name(&self) -> &str {
        "random"
    }

    fn explain(
        &self,
        _model: &LogisticModel,
        _schema: &FeatureSchema,
        instance: &Instance,
        instance_index: usize,
        l: usize,
    ) -> Result<Explanation> {
        random_explain(
            instance,
            l,
            derive_seed(self.seed, "random", instance_index as u64),
        )
    }
}

pub struct OmissionExplainer;

impl Explainer for OmissionExplainer {
    fn name(&self) -> &str {
        "omission"
    }

    fn explain(
        &self,
        model: &LogisticModel,
        schema: &FeatureSchema,
        instance: &Instance,
        _instance_index: usize,
        l: usize,
    ) -> Result<Explanation> {
        omission_explain(model, schema, instance, l)
    }
}

pub struct WhiteboxSelfExplainer;

impl Explainer for WhiteboxSelfExplainer {
    fn name(&self) -> &str {
        "whitebox"
    }

    fn explain(
        &self,
        model: &LogisticModel,
        schema: &FeatureSchema,
        instance: &Instance,
        _instance_index: usize,
        l: usize,
    ) -> Result<Explanation> {
        whitebox_self_explain(model, schema, instance, l)
    }
}

pub struct LimeExplainer {
    pub cfg: LimeConfig,
}

impl Explainer for LimeExplainer {
    fn name(&self) -> &str {
        "lime"
    }

    fn explain(
        &self,
        model: &LogisticModel,
        schema: &FeatureSchema,
        instance: &Instance,
        instance_index: usize,
        l: usize,
    ) -> Result<Explanation> {
        let cfg = LimeConfig {
            seed: derive_seed(self.cfg.seed, "lime", instance_index as u64),
            ..self.cfg
        };
        lime_explain(model, schema, instance, l, &cfg)
    }
}

pub struct DecisionBoundaryExplainer {
    pub cfg: DecisionBoundaryConfig,
}

impl Explainer for DecisionBoundaryExplainer {
    fn name(&self) -> &str {
        "decision_boundary"
    }

    fn explain(
        &self,
        model: &LogisticModel,
        schema: &FeatureSchema,
        instance: &Instance,
        instance_index: usize,
        l: usize,
    ) -> Result<Explanation> {
        let cfg = DecisionBoundaryConfig {
            seed: derive_seed(self.cfg.seed, "decision_boundary", instance_index as u64),
            ..self.cfg
        };
        decision_boundary_explain(model, schema, instance, l, &cfg)
    }
}

/// Pre-computed explanations imported from a file, one line per instance of
/// space-separated feature indices. Lets third-party explainers join the
/// comparison without linking them.
pub struct ExternalExplainer {
    name: String,
    explanations: Vec<Explanation>,
}

impl ExternalExplainer {
    pub fn from_file(name: &str, path: &Path, feature_count: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut explanations = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let indices: Vec<usize> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| Error::Malformed {
                        path: path.into(),
                        line: i + 1,
                        msg: format!("`{tok}` is not a feature index"),
                    })
                })
                .collect::<Result<_>>()?;
            explanations.push(Explanation::new(indices, feature_count).map_err(|e| {
                Error::Malformed {
                    path: path.into(),
                    line: i + 1,
                    msg: e.to_string(),
                }
            })?);
        }
        if explanations.is_empty() {
            return Err(Error::EmptyInput(path.into()));
        }
        Ok(ExternalExplainer {
            name: name.to_owned(),
            explanations,
        })
    }

    pub fn len(&self) -> usize {
        self.explanations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.explanations.is_empty()
    }
}

impl Explainer for ExternalExplainer {
    fn name(&self) -> &str {
        &self.name
    }

    fn explain(
        &self,
        _model: &LogisticModel,
        _schema: &FeatureSchema,
        _instance: &Instance,
        instance_index: usize,
        _l: usize,
    ) -> Result<Explanation> {
        self.explanations
            .get(instance_index)
            .cloned()
            .ok_or_else(|| {
                Error::Config(format!(
                    "external explainer `{}` covers {} instances, index {instance_index} requested",
                    self.name,
                    self.explanations.len()
                ))
            })
    }
}

/// Explain every instance of a dataset in parallel; results are in dataset
/// order and independent of scheduling.
pub fn explain_dataset(
    explainer: &dyn Explainer,
    model: &LogisticModel,
    dataset: &Dataset,
    l: usize,
) -> Result<Vec<Explanation>> {
    let outcomes: Vec<Result<Explanation>> = dataset
        .instances()
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            explainer
                .explain(model, dataset.schema(), inst, i, l)
                .map_err(Error::at_instance(i))
        })
        .collect();
    // sequential fold so the lowest failing index wins regardless of
    // scheduling
    outcomes.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize, SyntheticSpec};

    fn toy() -> (crate::dataset::Dataset, LogisticModel) {
        synthesize(&SyntheticSpec::categorical(4, 3, 30, 1.0), 2).unwrap()
    }

    #[test]
    fn random_exhausts_when_l_equals_m() {
        let inst = Instance::new(vec![0, 0, 0]);
        let e = random_explain(&inst, 3, 9).unwrap();
        let mut idx = e.feature_indices().to_vec();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn random_is_deterministic_under_seed() {
        let inst = Instance::new(vec![0; 8]);
        let a = random_explain(&inst, 3, 123).unwrap();
        let b = random_explain(&inst, 3, 123).unwrap();
        assert_eq!(a.feature_indices(), b.feature_indices());
        let c = random_explain(&inst, 3, 124).unwrap();
        // almost surely different; either way must stay valid
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn random_rejects_l_above_m() {
        let inst = Instance::new(vec![0, 0]);
        assert!(random_explain(&inst, 3, 0).is_err());
    }

    #[test]
    fn random_is_close_to_uniform() {
        // 10^4 draws over 4 features, L=1: each frequency within 3 sigma of 1/4
        let inst = Instance::new(vec![0; 4]);
        let mut counts = [0usize; 4];
        for s in 0..10_000u64 {
            let e = random_explain(&inst, 1, derive_seed(7, "uniformity", s)).unwrap();
            counts[e.feature_indices()[0]] += 1;
        }
        let sigma = (10_000.0f64 * 0.25 * 0.75).sqrt();
        for &c in &counts {
            assert!(
                (c as f64 - 2500.0).abs() <= 3.0 * sigma,
                "count {c} outside 2500 +/- {:.0}",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn omission_on_constant_model_returns_first_features() {
        let (ds, _) = toy();
        let zero = LogisticModel::new(vec![0.0; ds.schema().width()], 0.0).unwrap();
        let e = omission_explain(&zero, ds.schema(), &ds.instances()[0], 2).unwrap();
        assert_eq!(e.feature_indices(), &[0, 1]);
    }

    #[test]
    fn omission_finds_planted_feature() {
        let (ds, _) = toy();
        let schema = ds.schema();
        let mut weights = vec![0.0; schema.width()];
        for w in &mut weights[schema.span(2).range()] {
            *w = 3.0;
        }
        let model = LogisticModel::new(weights, 0.0).unwrap();
        for inst in ds.instances() {
            let e = omission_explain(&model, schema, inst, 1).unwrap();
            assert_eq!(e.feature_indices(), &[2]);
        }
    }

    #[test]
    fn omission_order_matches_signed_effects_for_predicted_class() {
        // zeroing span j shifts the logit by -effect_j, so the omission order
        // must equal the effect order oriented toward the predicted class.
        let (ds, model) = toy();
        let schema = ds.schema();
        for inst in ds.instances() {
            let rep = schema.encode(inst).unwrap();
            let label = model.predict(&rep).unwrap().label;
            let effects = crate::blackbox::per_feature_effects(&model, schema, inst).unwrap();
            let oriented: Vec<f64> = effects
                .iter()
                .map(|&e| if label == 1 { e } else { -e })
                .collect();
            let expected = rank_descending(&oriented);
            let e = omission_explain(&model, schema, inst, schema.feature_count()).unwrap();
            assert_eq!(e.feature_indices(), &expected[..]);
        }
    }

    #[test]
    fn whitebox_matches_ground_truth_everywhere() {
        let (ds, model) = toy();
        for inst in ds.instances() {
            let a = whitebox_self_explain(&model, ds.schema(), inst, 2).unwrap();
            let b = ground_truth_features(&model, ds.schema(), inst, 2).unwrap();
            assert_eq!(a.feature_indices(), b.feature_indices());
        }
    }

    #[test]
    fn whitebox_recovery_is_perfect() {
        let (ds, model) = toy();
        let gold: Vec<Explanation> = ds
            .instances()
            .iter()
            .map(|i| ground_truth_features(&model, ds.schema(), i, 2).unwrap())
            .collect();
        let own: Vec<Explanation> = ds
            .instances()
            .iter()
            .map(|i| whitebox_self_explain(&model, ds.schema(), i, 2).unwrap())
            .collect();
        assert_eq!(crate::blackbox::recovery_fraction(&own, &gold).unwrap(), 1.0);
    }

    #[test]
    fn whitebox_exhausts_when_l_equals_m() {
        let (ds, model) = toy();
        let e = whitebox_self_explain(&model, ds.schema(), &ds.instances()[0], 4).unwrap();
        let mut idx = e.feature_indices().to_vec();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }

    #[test]
    fn every_explainer_returns_l_distinct_valid_indices() {
        let (ds, model) = toy();
        let explainers: Vec<Box<dyn Explainer>> = vec![
            Box::new(RandomExplainer { seed: 1 }),
            Box::new(OmissionExplainer),
            Box::new(WhiteboxSelfExplainer),
            Box::new(LimeExplainer {
                cfg: LimeConfig {
                    n_samples: 40,
                    seed: 1,
                    ..LimeConfig::default()
                },
            }),
            Box::new(DecisionBoundaryExplainer {
                cfg: DecisionBoundaryConfig {
                    n_samples: 40,
                    seed: 1,
                },
            }),
        ];
        for l in 1..=4usize {
            for ex in &explainers {
                let all = explain_dataset(ex.as_ref(), &model, &ds, l).unwrap();
                assert_eq!(all.len(), ds.len());
                for e in &all {
                    assert_eq!(e.len(), l, "{} returned wrong size", ex.name());
                    let mut sorted = e.feature_indices().to_vec();
                    sorted.sort_unstable();
                    sorted.dedup();
                    assert_eq!(sorted.len(), l);
                    assert!(sorted.iter().all(|&j| j < 4));
                }
            }
        }
    }

    #[test]
    fn planted_model_consensus_between_omission_lime_whitebox() {
        // on a model that depends on exactly one feature, omission and
        // whitebox must rank it first on every instance, lime on >= 95% of
        // seeded runs
        let (ds, _) = toy();
        let schema = ds.schema();
        let mut weights = vec![0.0; schema.width()];
        let span = schema.span(1);
        weights[span.start] = -2.0;
        weights[span.start + 1] = 1.0;
        weights[span.start + 2] = 2.5;
        let model = LogisticModel::new(weights, 0.1).unwrap();
        let inst = &ds.instances()[0];
        assert_eq!(
            omission_explain(&model, schema, inst, 1).unwrap().feature_indices(),
            &[1]
        );
        assert_eq!(
            whitebox_self_explain(&model, schema, inst, 1)
                .unwrap()
                .feature_indices(),
            &[1]
        );
        let mut hits = 0;
        for seed in 0..100u64 {
            let cfg = LimeConfig {
                n_samples: 100,
                seed,
                ..LimeConfig::default()
            };
            let e = lime_explain(&model, schema, inst, 1, &cfg).unwrap();
            hits += usize::from(e.feature_indices()[0] == 1);
        }
        assert!(hits >= 95, "lime recovered the planted feature {hits}/100");
    }

    #[test]
    fn external_explanations_load_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ext.txt");
        std::fs::write(&path, "0 2\n1\n3 0\n").unwrap();
        let ex = ExternalExplainer::from_file("anchor", &path, 4).unwrap();
        assert_eq!(ex.len(), 3);
        let (ds, model) = toy();
        let e = ex
            .explain(&model, ds.schema(), &ds.instances()[1], 1, 1)
            .unwrap();
        assert_eq!(e.feature_indices(), &[1]);
        // out-of-range index in file
        std::fs::write(&path, "0 9\n").unwrap();
        assert!(ExternalExplainer::from_file("anchor", &path, 4).is_err());
    }
}
