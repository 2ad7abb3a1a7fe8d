//! Seeded synthetic benchmarks: uniform feature draws plus a planted
//! logistic model whose predictions define the labels.

use super::{Dataset, FeatureKind, FeatureSchema, FeatureSpec, Instance};
use crate::blackbox::LogisticModel;
use crate::error::{Error, Result};
use crate::seed::rng_for;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticFeature {
    Categorical { vocab_size: usize },
    Embedded { dim: usize, vocab_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub features: Vec<SyntheticFeature>,
    pub n_instances: usize,
    pub weight_scale: f64,
}

impl SyntheticSpec {
    /// `m` categorical features with `vocab_size` values each.
    pub fn categorical(m: usize, vocab_size: usize, n_instances: usize, weight_scale: f64) -> Self {
        SyntheticSpec {
            features: vec![SyntheticFeature::Categorical { vocab_size }; m],
            n_instances,
            weight_scale,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::Config("synthetic spec declares no features".into()));
        }
        if self.n_instances == 0 {
            return Err(Error::Config("synthetic spec declares no instances".into()));
        }
        if !(self.weight_scale.is_finite() && self.weight_scale >= 0.0) {
            return Err(Error::Config("weight_scale must be finite and >= 0".into()));
        }
        for (j, f) in self.features.iter().enumerate() {
            match f {
                SyntheticFeature::Categorical { vocab_size } if *vocab_size == 0 => {
                    return Err(Error::Config(format!("feature {j} has an empty vocabulary")));
                }
                SyntheticFeature::Embedded { dim, vocab_size }
                    if *dim == 0 || *vocab_size == 0 =>
                {
                    return Err(Error::Config(format!("feature {j} has dim 0 or no tokens")));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Generate a dataset sampled uniformly over feature values together with a
/// planted logistic model. Labels are the planted model's predictions, so
/// the task is realizable by construction. Identical `(spec, seed)` pairs
/// yield identical output.
pub fn synthesize(spec: &SyntheticSpec, seed: u64) -> Result<(Dataset, LogisticModel)> {
    spec.validate()?;
    let mut rng = rng_for(seed, "synthesize", 0);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");

    let mut features = Vec::with_capacity(spec.features.len());
    for (j, f) in spec.features.iter().enumerate() {
        let kind = match f {
            SyntheticFeature::Categorical { vocab_size } => FeatureKind::Categorical {
                vocabulary: (0..*vocab_size).map(|v| format!("v{v}")).collect(),
            },
            SyntheticFeature::Embedded { dim, vocab_size } => {
                let mut tokens: Vec<String> = (0..*vocab_size).map(|t| format!("t{t}")).collect();
                let mut vectors: Vec<Vec<f64>> = (0..*vocab_size)
                    .map(|_| (0..*dim).map(|_| unit.sample(&mut rng)).collect())
                    .collect();
                tokens.push("<mask>".into());
                vectors.push(vec![0.0; *dim]);
                FeatureKind::Embedded {
                    dim: *dim,
                    tokens,
                    vectors,
                    mask_token: *vocab_size,
                }
            }
        };
        features.push(FeatureSpec {
            name: format!("f{j}"),
            kind,
        });
    }
    let schema = FeatureSchema::new(features)?;

    let scaled = Normal::new(0.0, spec.weight_scale).expect("valid normal");
    let weights: Vec<f64> = (0..schema.width()).map(|_| scaled.sample(&mut rng)).collect();
    let model = LogisticModel::new(weights, 0.0)?;

    let mut instances = Vec::with_capacity(spec.n_instances);
    for _ in 0..spec.n_instances {
        let values = spec
            .features
            .iter()
            .map(|f| match f {
                // embedded draws exclude the mask token: it stands for padding
                SyntheticFeature::Categorical { vocab_size }
                | SyntheticFeature::Embedded { vocab_size, .. } => {
                    rng.random_range(0..*vocab_size)
                }
            })
            .collect();
        let mut inst = Instance::new(values);
        let rep = schema.encode(&inst)?;
        inst.gold_label = Some(model.predict(&rep)?.label);
        instances.push(inst);
    }
    let dataset = Dataset::new(schema, instances)?;
    Ok((dataset, model))
}
