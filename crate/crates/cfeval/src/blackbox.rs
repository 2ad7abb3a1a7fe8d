//! The black-box prediction contract: a binary logistic regression that
//! doubles as the whitebox ground-truth source.
//!
//! Training is full-batch gradient descent from all-zero weights, so a
//! `(dataset, labels, hyper)` triple always reproduces the same model bit
//! for bit.

use crate::dataset::{Dataset, FeatureSchema, Instance, Representation};
use crate::error::{Error, Result};
use crate::explainers::Explanation;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary logistic regression over representation vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    weights: Vec<f64>,
    bias: f64,
}

/// Class probabilities and the argmax label, ties toward label 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: u8,
    pub probs: [f64; 2],
}

impl Prediction {
    /// Probability of the predicted class.
    pub fn confidence(&self) -> f64 {
        self.probs[self.label as usize]
    }
}

impl LogisticModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
            return Err(Error::Schema("model weights must be finite".into()));
        }
        Ok(LogisticModel { weights, bias })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Representation length this model expects.
    pub fn width(&self) -> usize {
        self.weights.len()
    }

    fn logit(&self, rep: &Representation) -> Result<f64> {
        if rep.values.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: rep.values.len(),
            });
        }
        let dot: f64 = self
            .weights
            .iter()
            .zip(&rep.values)
            .map(|(w, x)| w * x)
            .sum();
        Ok(dot + self.bias)
    }

    /// `p1 = sigmoid(w . rep + b)`, `p0 = 1 - p1`, label by argmax with ties
    /// toward 0.
    pub fn predict(&self, rep: &Representation) -> Result<Prediction> {
        let p1 = sigmoid(self.logit(rep)?);
        let probs = [1.0 - p1, p1];
        let label = u8::from(probs[1] > probs[0]);
        Ok(Prediction { label, probs })
    }

    /// Gradient of `p(target_class | rep)` with respect to the
    /// representation: `+/-p1(1-p1) w`.
    pub fn gradient(&self, rep: &Representation, target_class: u8) -> Result<Vec<f64>> {
        let p1 = sigmoid(self.logit(rep)?);
        let scale = p1 * (1.0 - p1) * if target_class == 1 { 1.0 } else { -1.0 };
        Ok(self.weights.iter().map(|w| scale * w).collect())
    }

    /// Write the model as decimal text: header with schema fingerprint and
    /// width, then bias and weights at 17 significant digits (bit-exact on
    /// reload).
    pub fn save(&self, path: &Path, schema: &FeatureSchema) -> Result<()> {
        let mut out = String::new();
        out.push_str("cfeval-model v1\n");
        out.push_str(&format!("schema {:016x}\n", schema.fingerprint()));
        out.push_str(&format!("width {}\n", self.weights.len()));
        for w in &self.weights {
            out.push_str(&format!("w {w:.16e}\n"));
        }
        out.push_str(&format!("bias {:.16e}\n", self.bias));
        let mut f = std::fs::File::create(path).map_err(crate::error::io_err(path))?;
        f.write_all(out.as_bytes()).map_err(crate::error::io_err(path))?;
        Ok(())
    }

    /// Load a model saved by [`save`](Self::save); returns the model and the
    /// schema fingerprint recorded in its header.
    pub fn load(path: &Path) -> Result<(Self, u64)> {
        let text = std::fs::read_to_string(path).map_err(crate::error::io_err(path))?;
        let malformed = |line: usize, msg: &str| Error::Malformed {
            path: path.into(),
            line,
            msg: msg.into(),
        };
        let mut lines = text.lines().enumerate();
        let (_, magic) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
        if magic != "cfeval-model v1" {
            return Err(malformed(1, "not a cfeval model file"));
        }
        let (_, schema_line) = lines.next().ok_or_else(|| malformed(2, "missing schema line"))?;
        let fingerprint = schema_line
            .strip_prefix("schema ")
            .and_then(|h| u64::from_str_radix(h, 16).ok())
            .ok_or_else(|| malformed(2, "bad schema line"))?;
        let (_, width_line) = lines.next().ok_or_else(|| malformed(3, "missing width line"))?;
        let width: usize = width_line
            .strip_prefix("width ")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| malformed(3, "bad width line"))?;
        let mut weights = Vec::with_capacity(width);
        let mut bias = None;
        for (i, line) in lines {
            if let Some(n) = line.strip_prefix("w ") {
                let w: f64 = n.parse().map_err(|_| malformed(i + 1, "bad weight line"))?;
                weights.push(w);
            } else if let Some(n) = line.strip_prefix("bias ") {
                let b: f64 = n.parse().map_err(|_| malformed(i + 1, "bad bias line"))?;
                bias = Some(b);
            } else {
                return Err(malformed(i + 1, "unexpected line"));
            }
        }
        let bias = bias.ok_or_else(|| malformed(4, "missing bias line"))?;
        if weights.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                got: weights.len(),
            });
        }
        Ok((LogisticModel::new(weights, bias)?, fingerprint))
    }
}

/// Hyperparameters for [`train_logistic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 400,
            l2: 1e-4,
        }
    }
}

/// A trained model together with its final training loss.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LogisticModel,
    pub final_loss: f64,
}

/// L2-regularized binary cross-entropy minimized by full-batch gradient
/// descent from all-zero weights. The bias is not regularized.
pub fn train_logistic(dataset: &Dataset, labels: &[u8], cfg: &TrainConfig) -> Result<TrainOutcome> {
    let n = dataset.len();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    if labels.iter().all(|&y| y == 0) || labels.iter().all(|&y| y == 1) {
        return Err(Error::SingleClass);
    }
    let lr_valid = cfg.learning_rate.is_finite() && cfg.learning_rate > 0.0;
    let l2_valid = cfg.l2.is_finite() && cfg.l2 >= 0.0;
    if !lr_valid || !l2_valid || cfg.epochs == 0 {
        return Err(Error::Config(
            "training needs learning_rate > 0, epochs > 0, l2 >= 0".into(),
        ));
    }
    let schema = dataset.schema();
    let reps: Vec<Representation> = dataset
        .instances()
        .iter()
        .map(|inst| schema.encode(inst))
        .collect::<Result<_>>()?;
    let width = schema.width();
    let mut weights = vec![0.0; width];
    let mut bias = 0.0;
    let inv_n = 1.0 / n as f64;
    let mut loss = f64::INFINITY;
    for epoch in 0..cfg.epochs {
        let mut grad_w = vec![0.0; width];
        let mut grad_b = 0.0;
        let mut nll = 0.0;
        for (rep, &y) in reps.iter().zip(labels) {
            let z: f64 = weights
                .iter()
                .zip(&rep.values)
                .map(|(w, x)| w * x)
                .sum::<f64>()
                + bias;
            let p = sigmoid(z);
            // log-loss via the numerically stable softplus form
            nll += if y == 1 {
                softplus(-z)
            } else {
                softplus(z)
            };
            let err = p - f64::from(y);
            for (g, x) in grad_w.iter_mut().zip(&rep.values) {
                *g += err * x;
            }
            grad_b += err;
        }
        loss = nll * inv_n
            + 0.5 * cfg.l2 * weights.iter().map(|w| w * w).sum::<f64>();
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= cfg.learning_rate * (g * inv_n + cfg.l2 * *w);
        }
        bias -= cfg.learning_rate * grad_b * inv_n;
    }
    if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: cfg.epochs });
    }
    Ok(TrainOutcome {
        model: LogisticModel { weights, bias },
        final_loss: loss,
    })
}

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        (1.0 + z.exp()).ln()
    }
}

/// Fraction of instances whose prediction matches the label.
pub fn accuracy(model: &LogisticModel, dataset: &Dataset, labels: &[u8]) -> Result<f64> {
    if labels.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            got: labels.len(),
        });
    }
    let mut hits = 0usize;
    for (inst, &y) in dataset.instances().iter().zip(labels) {
        let rep = dataset.schema().encode(inst)?;
        if model.predict(&rep)?.label == y {
            hits += 1;
        }
    }
    Ok(hits as f64 / labels.len() as f64)
}

/// Per-feature effect: the sum of `weight * value` over the feature's span.
pub fn per_feature_effects(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
) -> Result<Vec<f64>> {
    let rep = schema.encode(instance)?;
    if rep.values.len() != model.width() {
        return Err(Error::DimensionMismatch {
            expected: model.width(),
            got: rep.values.len(),
        });
    }
    Ok(schema
        .spans()
        .iter()
        .map(|span| {
            span.range()
                .map(|i| model.weights()[i] * rep.values[i])
                .sum()
        })
        .collect())
}

/// Gold explanation of the whitebox: the top-L features by absolute effect,
/// ties toward the lower feature index.
pub fn ground_truth_features(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
    l: usize,
) -> Result<Explanation> {
    if l == 0 || l > schema.feature_count() {
        return Err(Error::Config(format!(
            "explanation size {l} outside 1..={}",
            schema.feature_count()
        )));
    }
    let effects = per_feature_effects(model, schema, instance)?;
    let mut order: Vec<usize> = (0..effects.len()).collect();
    order.sort_by(|&a, &b| {
        effects[b]
            .abs()
            .partial_cmp(&effects[a].abs())
            .expect("finite effects")
            .then(a.cmp(&b))
    });
    order.truncate(l);
    let scores = order.iter().map(|&j| effects[j]).collect();
    Explanation::with_scores(order, scores, schema.feature_count())
}

/// Mean over instances of `|explanation intersect gold| / |gold|`.
pub fn recovery_fraction(explanations: &[Explanation], gold: &[Explanation]) -> Result<f64> {
    if explanations.len() != gold.len() {
        return Err(Error::DimensionMismatch {
            expected: gold.len(),
            got: explanations.len(),
        });
    }
    if explanations.is_empty() {
        return Err(Error::Config("recovery_fraction needs instances".into()));
    }
    let mut total = 0.0;
    for (e, g) in explanations.iter().zip(gold) {
        let hit = e
            .feature_indices()
            .iter()
            .filter(|i| g.feature_indices().contains(i))
            .count();
        total += hit as f64 / g.feature_indices().len() as f64;
    }
    Ok(total / explanations.len() as f64)
}
