//! Counterfactual search on the explained features: exhaustive enumeration
//! over categorical vocabularies and gradient optimization in embedding
//! space.

use crate::blackbox::LogisticModel;
use crate::dataset::{Dataset, FeatureKind, FeatureSchema, Instance, Representation};
use crate::error::{Error, Result};
use crate::explainers::Explanation;
use crate::seed::derive_seed;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative objective improvement below which the optimizer stops.
const CONVERGENCE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", content = "c", rename_all = "snake_case")]
pub enum DistanceMetric {
    Euclidean,
    Cosine,
    /// Fixed distance for settings where embeddings are inaccessible.
    Constant(f64),
}

/// Distance between two representations under the chosen metric.
pub fn distance(a: &Representation, b: &Representation, metric: DistanceMetric) -> Result<f64> {
    match metric {
        DistanceMetric::Constant(c) => Ok(c),
        DistanceMetric::Euclidean => {
            check_len(a, b)?;
            Ok(a.values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt())
        }
        DistanceMetric::Cosine => {
            check_len(a, b)?;
            let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
            let na = a.values.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.values.iter().map(|x| x * x).sum::<f64>().sqrt();
            if na == 0.0 || nb == 0.0 {
                return Err(Error::ZeroVector);
            }
            Ok(1.0 - dot / (na * nb))
        }
    }
}

fn check_len(a: &Representation, b: &Representation) -> Result<()> {
    if a.values.len() != b.values.len() {
        return Err(Error::DimensionMismatch {
            expected: a.values.len(),
            got: b.values.len(),
        });
    }
    Ok(())
}

/// New value of one edited feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EditedValue {
    /// Vocabulary index of the replacement categorical value.
    Categorical(usize),
    /// Free embedding vector found by the continuous optimizer.
    Embedding(Vec<f64>),
}

/// Outcome of one counterfactual search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualResult {
    pub original: Instance,
    /// Edited feature index -> new value; keys are a subset of the
    /// explanation's indices.
    pub edited: BTreeMap<usize, EditedValue>,
    pub original_label: u8,
    pub original_probs: [f64; 2],
    /// Label and probabilities at the counterfactual.
    pub label: u8,
    pub probs: [f64; 2],
    pub flipped: bool,
    pub distance: f64,
    /// Accepted optimizer steps (continuous search only).
    pub iterations: usize,
    /// Objective value after each accepted step, starting at the
    /// initialization (continuous search only).
    pub objective_trace: Vec<f64>,
}

impl CounterfactualResult {
    /// Drop in the original class's probability, the softened-validity term.
    pub fn probability_drop(&self) -> f64 {
        self.original_probs[self.original_label as usize] - self.probs[self.original_label as usize]
    }
}

/// Settings for [`continuous_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Trade-off between the proximity term and the class probability.
    pub alpha: f64,
    pub step_size: f64,
    pub max_iters: usize,
    /// Scale of the Gaussian noise added to the original embeddings at
    /// initialization.
    pub init_noise_scale: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            alpha: 1.0,
            step_size: 0.05,
            max_iters: 500,
            init_noise_scale: 0.01,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        let alpha_valid = self.alpha.is_finite() && self.alpha >= 0.0;
        if !alpha_valid {
            return Err(Error::Config("alpha must be finite and >= 0".into()));
        }
        let step_valid = self.step_size.is_finite() && self.step_size > 0.0;
        let noise_valid = self.init_noise_scale.is_finite() && self.init_noise_scale >= 0.0;
        if !step_valid || !noise_valid || self.max_iters == 0 {
            return Err(Error::Config(
                "optimizer needs step_size > 0, max_iters > 0, init_noise_scale >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Exhaustive search over the Cartesian product of the explained features'
/// vocabularies, in lexicographic vocabulary order, skipping the original
/// assignment.
///
/// Hard mode returns the first flipping assignment; if none flips, a
/// seeded-random non-original assignment is returned with `flipped = false`.
/// Soft mode differs only in the no-flip branch: it returns the assignment
/// with the largest drop in the original class's probability.
pub fn discrete_search(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
    explanation: &Explanation,
    soft: bool,
    seed: u64,
) -> Result<CounterfactualResult> {
    discrete_search_with_metric(
        model,
        schema,
        instance,
        explanation,
        soft,
        seed,
        DistanceMetric::Euclidean,
    )
}

pub fn discrete_search_with_metric(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
    explanation: &Explanation,
    soft: bool,
    seed: u64,
    metric: DistanceMetric,
) -> Result<CounterfactualResult> {
    schema.validate(instance)?;
    let explained = explanation.feature_indices();
    let mut sizes = Vec::with_capacity(explained.len());
    for &j in explained {
        match &schema.feature(j).kind {
            FeatureKind::Categorical { vocabulary } => sizes.push(vocabulary.len()),
            FeatureKind::Embedded { .. } => {
                return Err(Error::Config(format!(
                    "discrete search requires categorical features; `{}` is embedded",
                    schema.feature(j).name
                )))
            }
        }
    }
    if sizes.iter().product::<usize>() <= 1 {
        return Err(Error::EmptySearchSpace {
            feature: schema.feature(explained[0]).name.clone(),
        });
    }

    let original_rep = schema.encode(instance)?;
    let original_pred = model.predict(&original_rep)?;
    let p_original = original_pred.probs[original_pred.label as usize];

    let original_assignment: Vec<usize> = explained.iter().map(|&j| instance.values[j]).collect();
    let mut assignment = vec![0usize; explained.len()];
    let mut best_soft: Option<(f64, Vec<usize>)> = None;
    let mut candidate = instance.clone();
    loop {
        if assignment != original_assignment {
            for (k, &j) in explained.iter().enumerate() {
                candidate.values[j] = assignment[k];
            }
            let rep = schema.encode(&candidate)?;
            let pred = model.predict(&rep)?;
            if pred.label != original_pred.label {
                return finish(
                    model, schema, instance, explained, &assignment, metric,
                    &original_rep, &original_pred,
                );
            }
            if soft {
                let drop = p_original - pred.probs[original_pred.label as usize];
                if best_soft.as_ref().is_none_or(|(d, _)| drop > *d) {
                    best_soft = Some((drop, assignment.clone()));
                }
            }
        }
        // advance the odometer: last axis fastest
        let mut k = explained.len();
        loop {
            if k == 0 {
                // exhausted without a flip
                let fallback = match best_soft {
                    Some((_, a)) => a,
                    None => random_non_original(&sizes, &original_assignment, seed),
                };
                return finish(
                    model, schema, instance, explained, &fallback, metric,
                    &original_rep, &original_pred,
                );
            }
            k -= 1;
            assignment[k] += 1;
            if assignment[k] < sizes[k] {
                break;
            }
            assignment[k] = 0;
        }
    }
}

fn random_non_original(sizes: &[usize], original: &[usize], seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let pick: Vec<usize> = sizes.iter().map(|&s| rng.random_range(0..s)).collect();
        if pick != original {
            return pick;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
    explained: &[usize],
    assignment: &[usize],
    metric: DistanceMetric,
    original_rep: &Representation,
    original_pred: &crate::blackbox::Prediction,
) -> Result<CounterfactualResult> {
    let mut candidate = instance.clone();
    let mut edited = BTreeMap::new();
    for (k, &j) in explained.iter().enumerate() {
        candidate.values[j] = assignment[k];
        if assignment[k] != instance.values[j] {
            edited.insert(j, EditedValue::Categorical(assignment[k]));
        }
    }
    let rep = schema.encode(&candidate)?;
    let pred = model.predict(&rep)?;
    Ok(CounterfactualResult {
        original: instance.clone(),
        edited,
        original_label: original_pred.label,
        original_probs: original_pred.probs,
        label: pred.label,
        probs: pred.probs,
        flipped: pred.label != original_pred.label,
        distance: distance(original_rep, &rep, metric)?,
        iterations: 0,
        objective_trace: Vec::new(),
    })
}

/// Gradient relaxation: minimize
/// `sum_j ||w_j - w_j^cf||^2 + alpha * p(yhat | x^cf)` over the explained
/// features' embedding vectors, everything else frozen.
///
/// The counterfactual embeddings start at the originals plus seeded Gaussian
/// noise and move by fixed-step gradient descent; a step is accepted only if
/// it improves the objective by at least the convergence threshold, so the
/// recorded objective trace is strictly decreasing.
pub fn continuous_search(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
    explanation: &Explanation,
    cfg: &OptimizerConfig,
) -> Result<CounterfactualResult> {
    continuous_search_with_metric(
        model,
        schema,
        instance,
        explanation,
        cfg,
        DistanceMetric::Euclidean,
    )
}

pub fn continuous_search_with_metric(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
    explanation: &Explanation,
    cfg: &OptimizerConfig,
    metric: DistanceMetric,
) -> Result<CounterfactualResult> {
    cfg.validate()?;
    schema.validate(instance)?;
    let explained = explanation.feature_indices();
    for &j in explained {
        if schema.feature(j).kind.is_categorical() {
            return Err(Error::Config(format!(
                "continuous search requires embedded features; `{}` is categorical",
                schema.feature(j).name
            )));
        }
    }
    let original_rep = schema.encode(instance)?;
    let original_pred = model.predict(&original_rep)?;
    let target = original_pred.label as usize;

    let spans: Vec<_> = explained.iter().map(|&j| schema.span(j)).collect();
    let free: Vec<usize> = spans.iter().flat_map(|s| s.range()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, 1.0).expect("valid normal");
    let mut rep = original_rep.clone();
    for &i in &free {
        rep.values[i] += cfg.init_noise_scale * noise.sample(&mut rng);
    }

    let objective = |rep: &Representation| -> Result<f64> {
        let proximity: f64 = free
            .iter()
            .map(|&i| {
                let d = original_rep.values[i] - rep.values[i];
                d * d
            })
            .sum();
        Ok(proximity + cfg.alpha * model.predict(rep)?.probs[target])
    };

    let mut current = objective(&rep)?;
    if !current.is_finite() {
        return Err(Error::NonFiniteObjective { iter: 0 });
    }
    let mut trace = vec![current];
    let mut iterations = 0;
    for iter in 0..cfg.max_iters {
        let prob_grad = model.gradient(&rep, original_pred.label)?;
        let mut candidate = rep.clone();
        for &i in &free {
            let g = 2.0 * (rep.values[i] - original_rep.values[i]) + cfg.alpha * prob_grad[i];
            candidate.values[i] -= cfg.step_size * g;
        }
        let next = objective(&candidate)?;
        if !next.is_finite() {
            return Err(Error::NonFiniteObjective { iter: iter + 1 });
        }
        if next < current - CONVERGENCE_EPS {
            rep = candidate;
            current = next;
            trace.push(current);
            iterations = iter + 1;
        } else {
            break;
        }
    }

    let pred = model.predict(&rep)?;
    let mut edited = BTreeMap::new();
    for (&j, span) in explained.iter().zip(&spans) {
        edited.insert(j, EditedValue::Embedding(rep.values[span.range()].to_vec()));
    }
    Ok(CounterfactualResult {
        original: instance.clone(),
        edited,
        original_label: original_pred.label,
        original_probs: original_pred.probs,
        label: pred.label,
        probs: pred.probs,
        flipped: pred.label != original_pred.label,
        distance: distance(&original_rep, &rep, metric)?,
        iterations,
        objective_trace: trace,
    })
}

/// Search mode for a batch run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SearchMode {
    Discrete { soft: bool },
    Continuous(OptimizerConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub mode: SearchMode,
    pub metric: DistanceMetric,
    pub seed: u64,
}

/// One counterfactual per instance, in dataset order. Instances run in
/// parallel; each derives its own RNG stream from the batch seed, so the
/// output is independent of scheduling.
pub fn batch_counterfactuals(
    model: &LogisticModel,
    dataset: &Dataset,
    explanations: &[Explanation],
    cfg: &BatchConfig,
) -> Result<Vec<CounterfactualResult>> {
    if explanations.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            got: explanations.len(),
        });
    }
    // collect per-instance results first so the error reported for a bad
    // batch is always the lowest failing index, regardless of scheduling
    let outcomes: Vec<Result<CounterfactualResult>> = dataset
        .instances()
        .par_iter()
        .zip(explanations.par_iter())
        .enumerate()
        .map(|(i, (inst, expl))| {
            let out = match &cfg.mode {
                SearchMode::Discrete { soft } => discrete_search_with_metric(
                    model,
                    dataset.schema(),
                    inst,
                    expl,
                    *soft,
                    derive_seed(cfg.seed, "discrete", i as u64),
                    cfg.metric,
                ),
                SearchMode::Continuous(opt) => {
                    let opt = OptimizerConfig {
                        seed: derive_seed(cfg.seed, "continuous", i as u64),
                        ..*opt
                    };
                    continuous_search_with_metric(
                        model,
                        dataset.schema(),
                        inst,
                        expl,
                        &opt,
                        cfg.metric,
                    )
                }
            };
            out.map_err(Error::at_instance(i))
        })
        .collect();
    outcomes.into_iter().collect()
}

/// Dump per-instance search traces as structured text for audit.
pub fn dump_traces(results: &[CounterfactualResult]) -> String {
    let mut out = String::new();
    for (i, r) in results.iter().enumerate() {
        out.push_str(&format!(
            "instance {i}: label {} -> {} p {:.6}/{:.6} -> {:.6}/{:.6} flipped={} distance={:.6}\n",
            r.original_label,
            r.label,
            r.original_probs[0],
            r.original_probs[1],
            r.probs[0],
            r.probs[1],
            r.flipped,
            r.distance
        ));
        for (j, v) in &r.edited {
            match v {
                EditedValue::Categorical(idx) => {
                    out.push_str(&format!("  feature {j} -> value {idx}\n"));
                }
                EditedValue::Embedding(vec) => {
                    let joined: Vec<String> = vec.iter().map(|x| format!("{x:.6}")).collect();
                    out.push_str(&format!("  feature {j} -> [{}]\n", joined.join(", ")));
                }
            }
        }
        if !r.objective_trace.is_empty() {
            out.push_str(&format!(
                "  objective {:.6} -> {:.6} in {} steps\n",
                r.objective_trace[0],
                r.objective_trace.last().unwrap(),
                r.iterations
            ));
        }
    }
    out
}
