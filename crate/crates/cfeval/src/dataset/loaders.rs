//! File ingestion: tabular CSV + schema declarations, and text corpora with
//! embedding tables.

use super::{Dataset, FeatureKind, FeatureSchema, FeatureSpec, Instance};
use crate::error::{io_err, Error, Result};
use serde::Deserialize;
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Deserialize)]
struct SchemaFile {
    feature: Vec<SchemaFileFeature>,
}

#[derive(Debug, Deserialize)]
struct SchemaFileFeature {
    name: String,
    kind: String,
    #[serde(default)]
    values: Option<Vec<String>>,
    #[serde(default)]
    dim: Option<usize>,
}

/// Parse a schema declaration file (TOML, one `[[feature]]` block per
/// feature). Only categorical features can be materialized from a
/// declaration alone; embedded features need an embedding table and are
/// rejected here with a pointer at [`load_text`].
pub fn load_schema_file(path: &Path) -> Result<FeatureSchema> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let parsed: SchemaFile = toml::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    let mut features = Vec::with_capacity(parsed.feature.len());
    for decl in parsed.feature {
        match decl.kind.as_str() {
            "categorical" => {
                let vocabulary = decl.values.ok_or_else(|| {
                    Error::Schema(format!("feature `{}` declares no values", decl.name))
                })?;
                features.push(FeatureSpec {
                    name: decl.name,
                    kind: FeatureKind::Categorical { vocabulary },
                });
            }
            "embedded" => {
                let _ = decl.dim.ok_or_else(|| {
                    Error::Schema(format!("feature `{}` declares no dim", decl.name))
                })?;
                return Err(Error::Schema(format!(
                    "feature `{}` is embedded; embedded features require an \
                     embedding table, use the text loader",
                    decl.name
                )));
            }
            other => {
                return Err(Error::Schema(format!(
                    "feature `{}` has unknown kind `{other}`",
                    decl.name
                )));
            }
        }
    }
    FeatureSchema::new(features)
}

/// Load a CSV dataset against a schema declaration file.
///
/// The header must cover every schema feature by name; a trailing `label`
/// column (values `0`/`1`) is optional. Unseen categorical values are
/// rejected with the offending row and feature.
pub fn load_tabular(csv_path: &Path, schema_path: &Path) -> Result<Dataset> {
    let schema = load_schema_file(schema_path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(csv_path)
        .map_err(|e| Error::Malformed {
            path: csv_path.into(),
            line: 1,
            msg: e.to_string(),
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Malformed {
            path: csv_path.into(),
            line: 1,
            msg: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();

    let mut column_of = HashMap::new();
    let mut label_column = None;
    for (c, h) in headers.iter().enumerate() {
        if h == "label" {
            label_column = Some(c);
        } else if schema.features().iter().any(|f| &f.name == h) {
            column_of.insert(h.clone(), c);
        } else {
            return Err(Error::UnknownColumn(h.clone()));
        }
    }
    for spec in schema.features() {
        if !column_of.contains_key(&spec.name) {
            return Err(Error::MissingColumn(spec.name.clone()));
        }
    }

    // per-feature value -> vocabulary index
    let lookups: Vec<HashMap<&str, usize>> = schema
        .features()
        .iter()
        .map(|spec| match &spec.kind {
            FeatureKind::Categorical { vocabulary } => vocabulary
                .iter()
                .enumerate()
                .map(|(i, v)| (v.as_str(), i))
                .collect(),
            FeatureKind::Embedded { .. } => unreachable!("rejected by load_schema_file"),
        })
        .collect();

    let mut instances = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1; // 1-based data row
        let record = record.map_err(|e| Error::Malformed {
            path: csv_path.into(),
            line: row + 1,
            msg: e.to_string(),
        })?;
        let mut values = Vec::with_capacity(schema.feature_count());
        for (j, spec) in schema.features().iter().enumerate() {
            let col = column_of[&spec.name];
            let cell = record.get(col).ok_or_else(|| Error::Malformed {
                path: csv_path.into(),
                line: row + 1,
                msg: format!("row has no column {col}"),
            })?;
            let idx = lookups[j].get(cell).ok_or_else(|| Error::UnknownValue {
                row,
                feature: spec.name.clone(),
                value: cell.to_owned(),
            })?;
            values.push(*idx);
        }
        let gold_label = match label_column {
            Some(col) => {
                let cell = record.get(col).unwrap_or("");
                match cell {
                    "0" => Some(0),
                    "1" => Some(1),
                    other => {
                        return Err(Error::UnknownValue {
                            row,
                            feature: "label".into(),
                            value: other.to_owned(),
                        })
                    }
                }
            }
            None => None,
        };
        instances.push(Instance { values, gold_label });
    }
    if instances.is_empty() {
        return Err(Error::EmptyInput(csv_path.into()));
    }
    Dataset::new(schema, instances)
}

/// Counters reported alongside a text load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TextLoadStats {
    /// Tokens not found in the embedding table, mapped to the mask token.
    pub oov_tokens: usize,
    /// Documents longer than `max_len`.
    pub truncated_docs: usize,
    /// Documents shorter than `max_len`.
    pub padded_docs: usize,
}

pub const MASK_TOKEN: &str = "<unk>";

/// [`load_text`] variant that also returns ingestion counters.
pub fn load_text_with_stats(
    corpus_path: &Path,
    embedding_path: &Path,
    max_len: usize,
) -> Result<(Dataset, TextLoadStats)> {
    if max_len == 0 {
        return Err(Error::Config("max_len must be positive".into()));
    }
    let emb_text = std::fs::read_to_string(embedding_path).map_err(io_err(embedding_path))?;
    let mut tokens: Vec<String> = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    let mut dim = None;
    for (i, line) in emb_text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-empty line").to_owned();
        let vals: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>().map_err(|_| Error::Malformed {
                    path: embedding_path.into(),
                    line: i + 1,
                    msg: format!("`{p}` is not a number"),
                })
            })
            .collect::<Result<_>>()?;
        let d = *dim.get_or_insert(vals.len());
        if vals.len() != d {
            return Err(Error::RaggedEmbedding {
                line: i + 1,
                expected: d,
                found: vals.len(),
            });
        }
        tokens.push(token);
        vectors.push(vals);
    }
    let dim = dim.ok_or_else(|| Error::EmptyInput(embedding_path.into()))?;
    if dim == 0 {
        return Err(Error::Malformed {
            path: embedding_path.into(),
            line: 1,
            msg: "embedding rows carry no values".into(),
        });
    }
    let mask_token = match tokens.iter().position(|t| t == MASK_TOKEN) {
        Some(i) => i,
        None => {
            tokens.push(MASK_TOKEN.to_owned());
            vectors.push(vec![0.0; dim]);
            tokens.len() - 1
        }
    };
    let token_of: HashMap<&str, usize> = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();

    let corpus = std::fs::read_to_string(corpus_path).map_err(io_err(corpus_path))?;
    let mut stats = TextLoadStats::default();
    let mut docs: Vec<(u8, Vec<usize>)> = Vec::new();
    for (i, line) in corpus.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (label_str, text) = line.split_once('\t').ok_or_else(|| Error::Malformed {
            path: corpus_path.into(),
            line: i + 1,
            msg: "expected `label<TAB>tokens...`".into(),
        })?;
        let label = match label_str.trim() {
            "0" => 0u8,
            "1" => 1u8,
            other => {
                return Err(Error::Malformed {
                    path: corpus_path.into(),
                    line: i + 1,
                    msg: format!("label `{other}` is not 0 or 1"),
                })
            }
        };
        let mut ids: Vec<usize> = Vec::with_capacity(max_len);
        for tok in text.split_whitespace() {
            if ids.len() == max_len {
                stats.truncated_docs += 1;
                break;
            }
            match token_of.get(tok) {
                Some(&id) => ids.push(id),
                None => {
                    stats.oov_tokens += 1;
                    ids.push(mask_token);
                }
            }
        }
        if ids.len() < max_len {
            stats.padded_docs += 1;
            ids.resize(max_len, mask_token);
        }
        docs.push((label, ids));
    }
    if docs.is_empty() {
        return Err(Error::EmptyInput(corpus_path.into()));
    }

    let features = (0..max_len)
        .map(|p| FeatureSpec {
            name: format!("tok_{p}"),
            kind: FeatureKind::Embedded {
                dim,
                tokens: tokens.clone(),
                vectors: vectors.clone(),
                mask_token,
            },
        })
        .collect();
    let schema = FeatureSchema::new(features)?;
    let instances = docs
        .into_iter()
        .map(|(label, values)| Instance::with_label(values, label))
        .collect();
    let dataset = Dataset::new(schema, instances)?;
    Ok((dataset, stats))
}

/// Load a text corpus (`label<TAB>tokens...`, one document per line) against
/// a whitespace-separated embedding file (`token v1 ... v_d` per line).
///
/// Documents are padded/truncated to `max_len` token positions; tokens
/// missing from the table fall back to the mask token.
pub fn load_text(corpus_path: &Path, embedding_path: &Path, max_len: usize) -> Result<Dataset> {
    load_text_with_stats(corpus_path, embedding_path, max_len).map(|(d, _)| d)
}
