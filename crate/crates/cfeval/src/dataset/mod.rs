//! Evaluation data: typed feature schemas, instances, and their real-vector
//! representations.
//!
//! A schema is an ordered list of features. Categorical features carry a
//! string vocabulary and encode as one-hot spans; embedded features carry a
//! token table and encode as fixed-width embedding spans. Instances store
//! one value index per feature, so a dataset is a dense `N x M` table of
//! small integers plus the schema that gives them meaning.

mod loaders;
mod synthetic;

pub use loaders::{load_schema_file, load_tabular, load_text, load_text_with_stats, TextLoadStats};
pub use synthetic::{synthesize, SyntheticFeature, SyntheticSpec};

use crate::error::{Error, Result};
use crate::seed::fnv1a;
use serde::{Deserialize, Serialize};

/// Contiguous region of a representation vector belonging to one feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub len: usize,
}

impl Span {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Finite string vocabulary, one-hot encoded.
    Categorical { vocabulary: Vec<String> },
    /// Token table mapping each token to a `dim`-length vector; `mask_token`
    /// indexes the token used for padding and out-of-vocabulary fallback.
    Embedded {
        dim: usize,
        tokens: Vec<String>,
        vectors: Vec<Vec<f64>>,
        mask_token: usize,
    },
}

impl FeatureKind {
    /// Number of distinct values an instance may take for this feature.
    pub fn value_count(&self) -> usize {
        match self {
            FeatureKind::Categorical { vocabulary } => vocabulary.len(),
            FeatureKind::Embedded { tokens, .. } => tokens.len(),
        }
    }

    /// Width of this feature's span in the representation.
    pub fn span_len(&self) -> usize {
        match self {
            FeatureKind::Categorical { vocabulary } => vocabulary.len(),
            FeatureKind::Embedded { dim, .. } => *dim,
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, FeatureKind::Categorical { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

/// Ordered feature list plus the derived representation layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    features: Vec<FeatureSpec>,
    spans: Vec<Span>,
    width: usize,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureSpec>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Schema("schema declares no features".into()));
        }
        let mut names = std::collections::HashSet::new();
        for spec in &features {
            if !names.insert(spec.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate feature name `{}`",
                    spec.name
                )));
            }
            match &spec.kind {
                FeatureKind::Categorical { vocabulary } => {
                    if vocabulary.is_empty() {
                        return Err(Error::Schema(format!(
                            "feature `{}` has an empty vocabulary",
                            spec.name
                        )));
                    }
                    let mut seen = std::collections::HashSet::new();
                    for v in vocabulary {
                        if !seen.insert(v.as_str()) {
                            return Err(Error::Schema(format!(
                                "feature `{}` repeats vocabulary value `{v}`",
                                spec.name
                            )));
                        }
                    }
                }
                FeatureKind::Embedded {
                    dim,
                    tokens,
                    vectors,
                    mask_token,
                } => {
                    if *dim == 0 {
                        return Err(Error::Schema(format!(
                            "feature `{}` has embedding dim 0",
                            spec.name
                        )));
                    }
                    if tokens.is_empty() || tokens.len() != vectors.len() {
                        return Err(Error::Schema(format!(
                            "feature `{}` has a malformed token table",
                            spec.name
                        )));
                    }
                    if *mask_token >= tokens.len() {
                        return Err(Error::Schema(format!(
                            "feature `{}` mask token is not in the table",
                            spec.name
                        )));
                    }
                    let mut seen = std::collections::HashSet::new();
                    for t in tokens {
                        if !seen.insert(t.as_str()) {
                            return Err(Error::Schema(format!(
                                "feature `{}` repeats token `{t}`",
                                spec.name
                            )));
                        }
                    }
                    for (t, v) in tokens.iter().zip(vectors) {
                        if v.len() != *dim {
                            return Err(Error::Schema(format!(
                                "feature `{}` token `{t}` has {} entries, expected {dim}",
                                spec.name,
                                v.len()
                            )));
                        }
                        if v.iter().any(|x| !x.is_finite()) {
                            return Err(Error::Schema(format!(
                                "feature `{}` token `{t}` has a non-finite entry",
                                spec.name
                            )));
                        }
                    }
                }
            }
        }
        let mut spans = Vec::with_capacity(features.len());
        let mut offset = 0;
        for spec in &features {
            let len = spec.kind.span_len();
            spans.push(Span { start: offset, len });
            offset += len;
        }
        Ok(FeatureSchema {
            features,
            spans,
            width: offset,
        })
    }

    /// Number of features M.
    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    /// Total representation length.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &FeatureSpec {
        &self.features[index]
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn span(&self, index: usize) -> Span {
        self.spans[index]
    }

    /// Check one instance against this schema.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if instance.values.len() != self.features.len() {
            return Err(Error::DimensionMismatch {
                expected: self.features.len(),
                got: instance.values.len(),
            });
        }
        for (j, (&value, spec)) in instance.values.iter().zip(&self.features).enumerate() {
            if value >= spec.kind.value_count() {
                return Err(Error::Schema(format!(
                    "feature `{}` (index {j}) has value id {value} outside its {} entries",
                    spec.name,
                    spec.kind.value_count()
                )));
            }
        }
        Ok(())
    }

    /// Concatenated real-vector encoding: one-hot spans for categorical
    /// features, table lookups for embedded ones.
    pub fn encode(&self, instance: &Instance) -> Result<Representation> {
        self.validate(instance)?;
        let mut values = vec![0.0; self.width];
        for (j, spec) in self.features.iter().enumerate() {
            let span = self.spans[j];
            match &spec.kind {
                FeatureKind::Categorical { .. } => {
                    values[span.start + instance.values[j]] = 1.0;
                }
                FeatureKind::Embedded { vectors, .. } => {
                    values[span.range()].copy_from_slice(&vectors[instance.values[j]]);
                }
            }
        }
        Ok(Representation {
            values,
            spans: self.spans.clone(),
        })
    }

    /// Inverse of [`encode`](Self::encode) for representations that lie
    /// exactly on the encoding grid.
    pub fn decode(&self, rep: &Representation) -> Result<Instance> {
        if rep.values.len() != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                got: rep.values.len(),
            });
        }
        let mut values = Vec::with_capacity(self.features.len());
        for (j, spec) in self.features.iter().enumerate() {
            let span = &rep.values[self.spans[j].range()];
            match &spec.kind {
                FeatureKind::Categorical { vocabulary } => {
                    let mut hot = None;
                    for (v, &x) in span.iter().enumerate() {
                        if x == 1.0 && hot.replace(v).is_some() {
                            return Err(Error::Schema(format!(
                                "feature `{}` span has more than one active cell",
                                spec.name
                            )));
                        } else if x != 0.0 && x != 1.0 {
                            return Err(Error::Schema(format!(
                                "feature `{}` span is not one-hot",
                                spec.name
                            )));
                        }
                    }
                    let v = hot.ok_or_else(|| {
                        Error::Schema(format!("feature `{}` span has no active cell", spec.name))
                    })?;
                    debug_assert!(v < vocabulary.len());
                    values.push(v);
                }
                FeatureKind::Embedded { vectors, .. } => {
                    let v = vectors.iter().position(|vec| vec == span).ok_or_else(|| {
                        Error::Schema(format!(
                            "feature `{}` span matches no token vector",
                            spec.name
                        ))
                    })?;
                    values.push(v);
                }
            }
        }
        Ok(Instance {
            values,
            gold_label: None,
        })
    }

    /// Stable fingerprint over names, kinds, vocabularies, and tables.
    pub fn fingerprint(&self) -> u64 {
        let mut buf = Vec::new();
        for spec in &self.features {
            buf.extend_from_slice(spec.name.as_bytes());
            buf.push(0);
            match &spec.kind {
                FeatureKind::Categorical { vocabulary } => {
                    buf.push(b'c');
                    for v in vocabulary {
                        buf.extend_from_slice(v.as_bytes());
                        buf.push(0);
                    }
                }
                FeatureKind::Embedded {
                    dim,
                    tokens,
                    vectors,
                    mask_token,
                } => {
                    buf.push(b'e');
                    buf.extend_from_slice(&dim.to_le_bytes());
                    buf.extend_from_slice(&mask_token.to_le_bytes());
                    for (t, vec) in tokens.iter().zip(vectors) {
                        buf.extend_from_slice(t.as_bytes());
                        buf.push(0);
                        for x in vec {
                            buf.extend_from_slice(&x.to_bits().to_le_bytes());
                        }
                    }
                }
            }
        }
        fnv1a(&buf)
    }
}

/// One data point: a value id per feature plus an optional gold label.
///
/// The gold label is carried only for training splits; no evaluation metric
/// reads it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub values: Vec<usize>,
    pub gold_label: Option<u8>,
}

impl Instance {
    pub fn new(values: Vec<usize>) -> Self {
        Instance {
            values,
            gold_label: None,
        }
    }

    pub fn with_label(values: Vec<usize>, label: u8) -> Self {
        Instance {
            values,
            gold_label: Some(label),
        }
    }
}

/// Evaluation set: schema plus instances that validate against it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    schema: FeatureSchema,
    instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(schema: FeatureSchema, instances: Vec<Instance>) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::Schema("dataset has no instances".into()));
        }
        for (i, inst) in instances.iter().enumerate() {
            schema.validate(inst).map_err(Error::at_instance(i))?;
        }
        Ok(Dataset { schema, instances })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// New dataset restricted to the given instance indices, in order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let instances = indices
            .iter()
            .map(|&i| self.instances[i].clone())
            .collect();
        Dataset::new(self.schema.clone(), instances)
    }

    /// Gold labels for every instance, or an error naming the first instance
    /// without one.
    pub fn labels(&self) -> Result<Vec<u8>> {
        self.instances
            .iter()
            .enumerate()
            .map(|(i, inst)| {
                inst.gold_label
                    .ok_or_else(|| Error::MissingColumn("label".into()))
                    .map_err(Error::at_instance(i))
            })
            .collect()
    }
}

/// Flat real vector with the feature span layout it was encoded under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    pub values: Vec<f64>,
    pub spans: Vec<Span>,
}

impl Representation {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy_schema() -> FeatureSchema {
        FeatureSchema::new(vec![
            FeatureSpec {
                name: "color".into(),
                kind: FeatureKind::Categorical {
                    vocabulary: vec!["red".into(), "green".into()],
                },
            },
            FeatureSpec {
                name: "size".into(),
                kind: FeatureKind::Categorical {
                    vocabulary: vec!["s".into(), "m".into(), "l".into()],
                },
            },
        ])
        .unwrap()
    }

    #[test]
    fn one_hot_span_layout() {
        let schema = toy_schema();
        assert_eq!(schema.width(), 5);
        let rep = schema.encode(&Instance::new(vec![0, 1])).unwrap();
        assert_eq!(rep.values, vec![1.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn one_hot_single_value() {
        let schema = FeatureSchema::new(vec![FeatureSpec {
            name: "f".into(),
            kind: FeatureKind::Categorical {
                vocabulary: vec!["a".into(), "b".into(), "c".into()],
            },
        }])
        .unwrap();
        let rep = schema.encode(&Instance::new(vec![1])).unwrap();
        assert_eq!(rep.values, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    #[allow(clippy::approx_constant)] // 1.4142 is the printed table constant
    fn single_feature_edit_distance_is_sqrt_2() {
        let schema = toy_schema();
        let a = schema.encode(&Instance::new(vec![0, 1])).unwrap();
        let b = schema.encode(&Instance::new(vec![1, 1])).unwrap();
        let d: f64 = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((d - 1.4142).abs() < 1e-3);
    }

    #[test]
    fn decode_round_trips() {
        let schema = toy_schema();
        let inst = Instance::new(vec![1, 2]);
        let rep = schema.encode(&inst).unwrap();
        let back = schema.decode(&rep).unwrap();
        assert_eq!(back.values, inst.values);
    }

    #[test]
    fn duplicate_vocabulary_rejected() {
        let err = FeatureSchema::new(vec![FeatureSpec {
            name: "f".into(),
            kind: FeatureKind::Categorical {
                vocabulary: vec!["a".into(), "a".into()],
            },
        }])
        .unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn out_of_vocabulary_index_rejected() {
        let schema = toy_schema();
        assert!(schema.validate(&Instance::new(vec![0, 3])).is_err());
        assert!(schema.validate(&Instance::new(vec![0])).is_err());
    }

    #[test]
    fn embedded_encode_uses_table() {
        let schema = FeatureSchema::new(vec![FeatureSpec {
            name: "tok".into(),
            kind: FeatureKind::Embedded {
                dim: 2,
                tokens: vec!["<unk>".into(), "hi".into()],
                vectors: vec![vec![0.0, 0.0], vec![0.5, -1.5]],
                mask_token: 0,
            },
        }])
        .unwrap();
        let rep = schema.encode(&Instance::new(vec![1])).unwrap();
        assert_eq!(rep.values, vec![0.5, -1.5]);
        assert_eq!(schema.decode(&rep).unwrap().values, vec![1]);
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = toy_schema();
        let b = toy_schema();
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = FeatureSchema::new(vec![FeatureSpec {
            name: "color".into(),
            kind: FeatureKind::Categorical {
                vocabulary: vec!["red".into(), "blue".into()],
            },
        }])
        .unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
