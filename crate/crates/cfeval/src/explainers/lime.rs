//! Local linear surrogate fitted on masked perturbations of one instance.

use crate::blackbox::LogisticModel;
use crate::dataset::{FeatureSchema, Instance};
use crate::error::{Error, Result};
use crate::metrics::{erase_indices, RemovalMode};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Coefficients this small are treated as exact zeros when ranking, so a
/// constant model degrades to the index tie rule instead of solver noise.
const COEFFICIENT_NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimeConfig {
    /// Perturbations drawn around the instance; must be at least M + 1.
    pub n_samples: usize,
    /// Exponential kernel width over Hamming distance; `None` picks
    /// `0.75 * sqrt(M)`.
    pub kernel_width: Option<f64>,
    /// Ridge strength for the surrogate fit.
    pub ridge_lambda: f64,
    pub seed: u64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        LimeConfig {
            n_samples: 200,
            kernel_width: None,
            ridge_lambda: 1e-3,
            seed: 0,
        }
    }
}

/// Fit a ridge regression from feature-presence vectors to the model's
/// probability of the original predicted class and return the top-`l`
/// features by absolute coefficient.
///
/// Each perturbation masks every feature independently with probability
/// one half (zeroed span for categorical features, mask-token embedding for
/// embedded ones) and is weighted by `exp(-hamming^2 / width^2)`.
pub fn lime_explain(
    model: &LogisticModel,
    schema: &FeatureSchema,
    instance: &Instance,
    l: usize,
    cfg: &LimeConfig,
) -> Result<super::Explanation> {
    let m = schema.feature_count();
    super::check_l(l, m)?;
    if cfg.n_samples < m + 1 {
        return Err(Error::Config(format!(
            "lime needs at least M+1 = {} samples, got {}",
            m + 1,
            cfg.n_samples
        )));
    }
    let width = cfg.kernel_width.unwrap_or(0.75 * (m as f64).sqrt());
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::Config("lime kernel width must be positive".into()));
    }
    if !(cfg.ridge_lambda.is_finite() && cfg.ridge_lambda >= 0.0) {
        return Err(Error::Config("lime ridge_lambda must be >= 0".into()));
    }

    let rep = schema.encode(instance)?;
    let pred = model.predict(&rep)?;
    let target_class = pred.label as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // weighted normal equations over [intercept, presence_0.. presence_{M-1}]
    let dim = m + 1;
    let mut gram = vec![vec![0.0f64; dim]; dim];
    let mut rhs = vec![0.0f64; dim];
    let mut masked = Vec::with_capacity(m);
    let mut x = vec![0.0f64; dim];
    for _ in 0..cfg.n_samples {
        masked.clear();
        x[0] = 1.0;
        for j in 0..m {
            let mask = rng.random_bool(0.5);
            x[j + 1] = if mask { 0.0 } else { 1.0 };
            if mask {
                masked.push(j);
            }
        }
        let perturbed = erase_indices(&rep, &masked, RemovalMode::Mask, schema);
        let target = model.predict(&perturbed)?.probs[target_class];
        let hamming = masked.len() as f64;
        let weight = (-(hamming * hamming) / (width * width)).exp();
        for a in 0..dim {
            if x[a] == 0.0 {
                continue;
            }
            let wxa = weight * x[a];
            for b in a..dim {
                gram[a][b] += wxa * x[b];
            }
            rhs[a] += wxa * target;
        }
    }
    #[allow(clippy::needless_range_loop)] // mirror the upper triangle in place
    for a in 0..dim {
        for b in 0..a {
            gram[a][b] = gram[b][a];
        }
    }
    // ridge on the feature coefficients, not the intercept
    for (a, row) in gram.iter_mut().enumerate().skip(1) {
        row[a] += cfg.ridge_lambda;
    }
    let beta = solve_linear(gram, rhs)?;

    let mut scores: Vec<f64> = beta[1..].to_vec();
    for s in &mut scores {
        if s.abs() <= COEFFICIENT_NOISE_FLOOR {
            *s = 0.0;
        }
    }
    let magnitudes: Vec<f64> = scores.iter().map(|s| s.abs()).collect();
    let order = super::rank_descending(&magnitudes);
    let top: Vec<usize> = order[..l].to_vec();
    let top_scores = top.iter().map(|&j| scores[j]).collect();
    super::Explanation::with_scores(top, top_scores, m)
}

/// Gaussian elimination with partial pivoting.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| a[p][col].abs().partial_cmp(&a[q][col].abs()).unwrap())
            .unwrap();
        if a[pivot_row][col].abs() < 1e-12 {
            return Err(Error::SingularFit);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            #[allow(clippy::needless_range_loop)] // two rows of one matrix
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}
