//! End-to-end runs: resolve a config, train the whitebox, generate
//! explanations, search counterfactuals, fold metrics, and emit reports.
//!
//! Every stage writes into one run directory named by the hash of the
//! resolved config, so reruns with the same config reuse the same artifacts
//! and reproduce them byte for byte.

use crate::blackbox::{
    accuracy, ground_truth_features, recovery_fraction, train_logistic, LogisticModel, TrainConfig,
};
use crate::counterfactual::{
    batch_counterfactuals, BatchConfig, DistanceMetric, OptimizerConfig, SearchMode,
};
use crate::dataset::{load_tabular, load_text, synthesize, Dataset, SyntheticFeature};
use crate::error::{io_err, Error, Result};
use crate::explainers::{
    explain_dataset, DecisionBoundaryConfig, DecisionBoundaryExplainer, Explainer, Explanation,
    ExternalExplainer, LimeConfig, LimeExplainer, OmissionExplainer, RandomExplainer,
    WhiteboxSelfExplainer,
};
use crate::metrics::{
    ces, ces_soft, comprehensiveness, dfr, proximity, sufficiency, validity, validity_soft,
    MethodScores, RemovalMode,
};
use crate::report::{build_report, emit_all, EvaluationReport, ExplainerScores};
use crate::seed::{fnv1a, rng_for};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetConfig {
    Tabular {
        csv: PathBuf,
        schema: PathBuf,
    },
    Text {
        corpus: PathBuf,
        embeddings: PathBuf,
        max_len: usize,
    },
    Synthetic {
        features: Vec<SyntheticFeature>,
        n_instances: usize,
        weight_scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CfMode {
    Discrete,
    Continuous,
}

impl CfMode {
    pub fn tag(&self) -> &'static str {
        match self {
            CfMode::Discrete => "discrete",
            CfMode::Continuous => "continuous",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CounterfactualConfig {
    pub mode: CfMode,
    /// Discrete search: prefer the largest probability drop when no flip
    /// exists.
    pub soft: bool,
    pub alpha: f64,
    pub step_size: f64,
    pub max_iters: usize,
    pub init_noise_scale: f64,
}

impl Default for CounterfactualConfig {
    fn default() -> Self {
        let opt = OptimizerConfig::default();
        CounterfactualConfig {
            mode: CfMode::Discrete,
            soft: false,
            alpha: opt.alpha,
            step_size: opt.step_size,
            max_iters: opt.max_iters,
            init_noise_scale: opt.init_noise_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimeSettings {
    pub n_samples: usize,
    pub kernel_width: Option<f64>,
    pub ridge_lambda: f64,
}

impl Default for LimeSettings {
    fn default() -> Self {
        let d = LimeConfig::default();
        LimeSettings {
            n_samples: d.n_samples,
            kernel_width: d.kernel_width,
            ridge_lambda: d.ridge_lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecisionBoundarySettings {
    pub n_samples: usize,
}

impl Default for DecisionBoundarySettings {
    fn default() -> Self {
        DecisionBoundarySettings {
            n_samples: DecisionBoundaryConfig::default().n_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalSource {
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainersConfig {
    pub names: Vec<String>,
    #[serde(default)]
    pub lime: LimeSettings,
    #[serde(default)]
    pub decision_boundary: DecisionBoundarySettings,
    #[serde(default)]
    pub external: Vec<ExternalSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluateConfig {
    pub removal_modes: Vec<RemovalMode>,
    pub distance: DistanceMetric,
    /// Also write per-instance counterfactual traces for audit.
    pub dump_traces: bool,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig {
            removal_modes: vec![RemovalMode::Delete],
            distance: DistanceMetric::Euclidean,
            dump_traces: false,
        }
    }
}

/// Fully resolved run configuration; hashing it names the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_l")]
    pub l: usize,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub train: TrainConfig,
    pub explainers: ExplainersConfig,
    #[serde(default)]
    pub counterfactual: CounterfactualConfig,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_l() -> usize {
    1
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::Config("l must be at least 1".into()));
        }
        if self.explainers.names.is_empty() {
            return Err(Error::Config("explainers.names must not be empty".into()));
        }
        if self.evaluate.removal_modes.is_empty() {
            return Err(Error::Config("evaluate.removal_modes must not be empty".into()));
        }
        for name in &self.explainers.names {
            let known = matches!(
                name.as_str(),
                "whitebox" | "omission" | "lime" | "random" | "decision_boundary"
            ) || self.explainers.external.iter().any(|e| &e.name == name);
            if !known {
                return Err(Error::Config(format!("unknown explainer `{name}`")));
            }
        }
        Ok(())
    }

    /// Run directory: `out_dir/run-<config hash>`, timestamp-free so stages
    /// can reuse each other's artifacts.
    pub fn run_dir(&self) -> Result<PathBuf> {
        let canonical = toml::to_string(self)
            .map_err(|e| Error::Config(format!("config serialization: {e}")))?;
        Ok(self.out_dir.join(format!("run-{:016x}", fnv1a(canonical.as_bytes()))))
    }

    pub fn dataset_id(&self) -> String {
        match &self.dataset {
            DatasetConfig::Tabular { csv, .. } => csv
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "tabular".into()),
            DatasetConfig::Text { corpus, .. } => corpus
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "text".into()),
            DatasetConfig::Synthetic {
                features,
                n_instances,
                ..
            } => format!("synthetic-m{}-n{}", features.len(), n_instances),
        }
    }
}

/// Dataset plus the seeded 80/10/10 split.
pub struct PreparedData {
    pub dataset: Dataset,
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl PreparedData {
    pub fn train_set(&self) -> Result<Dataset> {
        self.dataset.subset(&self.train_indices)
    }

    pub fn val_set(&self) -> Result<Dataset> {
        self.dataset.subset(&self.val_indices)
    }

    pub fn test_set(&self) -> Result<Dataset> {
        self.dataset.subset(&self.test_indices)
    }
}

/// Load the configured dataset and split it by seeded shuffle then
/// contiguous 80/10/10 slicing.
pub fn prepare_data(config: &RunConfig) -> Result<PreparedData> {
    let dataset = match &config.dataset {
        DatasetConfig::Tabular { csv, schema } => load_tabular(csv, schema)?,
        DatasetConfig::Text {
            corpus,
            embeddings,
            max_len,
        } => load_text(corpus, embeddings, *max_len)?,
        DatasetConfig::Synthetic {
            features,
            n_instances,
            weight_scale,
        } => {
            let spec = crate::dataset::SyntheticSpec {
                features: features.clone(),
                n_instances: *n_instances,
                weight_scale: *weight_scale,
            };
            synthesize(&spec, config.seed)?.0
        }
    };
    let n = dataset.len();
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng_for(config.seed, "split", 0));
    let n_train = (n * 8) / 10;
    let n_val = n / 10;
    let train_indices = indices[..n_train].to_vec();
    let val_indices = indices[n_train..n_train + n_val].to_vec();
    let test_indices = indices[n_train + n_val..].to_vec();
    if test_indices.is_empty() {
        return Err(Error::Config(format!(
            "dataset of {n} instances leaves an empty test split"
        )));
    }
    Ok(PreparedData {
        dataset,
        train_indices,
        val_indices,
        test_indices,
    })
}

/// Mode/schema compatibility: discrete needs categorical features,
/// continuous needs embedded ones. Checked before any search runs.
fn check_mode_compatibility(config: &RunConfig, dataset: &Dataset) -> Result<()> {
    let schema = dataset.schema();
    for spec in schema.features() {
        let categorical = spec.kind.is_categorical();
        match config.counterfactual.mode {
            CfMode::Discrete if !categorical => {
                return Err(Error::Config(format!(
                    "discrete mode on embedded feature `{}`; use mode = \"continuous\"",
                    spec.name
                )))
            }
            CfMode::Continuous if categorical => {
                return Err(Error::Config(format!(
                    "continuous mode on categorical feature `{}`; use mode = \"discrete\"",
                    spec.name
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub model_path: PathBuf,
    pub final_loss: f64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub test_accuracy: f64,
}

/// Train the whitebox on the train split and save it into the run
/// directory.
pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    let data = prepare_data(config)?;
    let run_dir = config.run_dir()?;
    std::fs::create_dir_all(&run_dir).map_err(io_err(&run_dir))?;

    let train_set = data.train_set()?;
    let labels = train_set.labels()?;
    let outcome = train_logistic(&train_set, &labels, &config.train)?;

    let val_set = data.val_set();
    let val_accuracy = match val_set {
        Ok(v) => accuracy(&outcome.model, &v, &v.labels()?)?,
        Err(_) => f64::NAN, // no validation instances at this dataset size
    };
    let test_set = data.test_set()?;
    let test_accuracy = accuracy(&outcome.model, &test_set, &test_set.labels()?)?;
    let train_accuracy = accuracy(&outcome.model, &train_set, &labels)?;

    let model_path = run_dir.join("model.txt");
    outcome.model.save(&model_path, data.dataset.schema())?;
    Ok(TrainSummary {
        model_path,
        final_loss: outcome.final_loss,
        train_accuracy,
        val_accuracy,
        test_accuracy,
    })
}

fn load_model(config: &RunConfig, data: &PreparedData) -> Result<LogisticModel> {
    let path = config.run_dir()?.join("model.txt");
    if !path.exists() {
        return Err(Error::Config(format!(
            "no model at {}; run `train` first",
            path.display()
        )));
    }
    let (model, fingerprint) = LogisticModel::load(&path)?;
    if fingerprint != data.dataset.schema().fingerprint() {
        return Err(Error::Config(
            "model was trained under a different schema".into(),
        ));
    }
    Ok(model)
}

fn build_explainers(
    config: &RunConfig,
    feature_count: usize,
) -> Result<Vec<Box<dyn Explainer>>> {
    config
        .explainers
        .names
        .iter()
        .map(|name| -> Result<Box<dyn Explainer>> {
            match name.as_str() {
                "whitebox" => Ok(Box::new(WhiteboxSelfExplainer)),
                "omission" => Ok(Box::new(OmissionExplainer)),
                "random" => Ok(Box::new(RandomExplainer { seed: config.seed })),
                "lime" => Ok(Box::new(LimeExplainer {
                    cfg: LimeConfig {
                        n_samples: config.explainers.lime.n_samples,
                        kernel_width: config.explainers.lime.kernel_width,
                        ridge_lambda: config.explainers.lime.ridge_lambda,
                        seed: config.seed,
                    },
                })),
                "decision_boundary" => Ok(Box::new(DecisionBoundaryExplainer {
                    cfg: DecisionBoundaryConfig {
                        n_samples: config.explainers.decision_boundary.n_samples,
                        seed: config.seed,
                    },
                })),
                other => {
                    let source = config
                        .explainers
                        .external
                        .iter()
                        .find(|e| e.name == other)
                        .ok_or_else(|| Error::Config(format!("unknown explainer `{other}`")))?;
                    Ok(Box::new(ExternalExplainer::from_file(
                        &source.name,
                        &source.path,
                        feature_count,
                    )?))
                }
            }
        })
        .collect()
}

fn explanation_path(run_dir: &Path, name: &str) -> PathBuf {
    run_dir.join("explanations").join(format!("{name}.txt"))
}

fn write_explanations(path: &Path, explanations: &[Explanation]) -> Result<()> {
    let parent = path.parent().expect("explanation files live in a directory");
    std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    let mut body = String::new();
    for e in explanations {
        let line: Vec<String> = e.feature_indices().iter().map(|j| j.to_string()).collect();
        body.push_str(&line.join(" "));
        body.push('\n');
    }
    std::fs::write(path, body).map_err(io_err(path))?;
    Ok(())
}

fn read_explanations(path: &Path, feature_count: usize, expected: usize) -> Result<Vec<Explanation>> {
    let external = ExternalExplainer::from_file("stored", path, feature_count)?;
    if external.len() != expected {
        return Err(Error::Config(format!(
            "{} holds {} explanations, test split has {expected}",
            path.display(),
            external.len()
        )));
    }
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let indices = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().expect("validated above"))
                .collect();
            Explanation::new(indices, feature_count)
        })
        .collect()
}

/// Run every configured explainer over the test split and write one
/// explanation file per explainer.
pub fn cmd_explain(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let data = prepare_data(config)?;
    let model = load_model(config, &data)?;
    let test_set = data.test_set()?;
    let run_dir = config.run_dir()?;
    let explainers = build_explainers(config, test_set.schema().feature_count())?;
    let mut paths = Vec::new();
    for explainer in &explainers {
        let explanations = explain_dataset(explainer.as_ref(), &model, &test_set, config.l)?;
        let path = explanation_path(&run_dir, explainer.name());
        write_explanations(&path, &explanations)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Score every explainer: counterfactual metrics, erasure baselines per
/// removal mode, ground-truth recovery, rankings, and correlations. Writes
/// `report.json`, `table1.md`, `table2.md`, and `scores.csv`.
pub fn cmd_evaluate(config: &RunConfig) -> Result<(EvaluationReport, Vec<PathBuf>)> {
    let data = prepare_data(config)?;
    let model = load_model(config, &data)?;
    let test_set = data.test_set()?;
    check_mode_compatibility(config, &test_set)?;
    let run_dir = config.run_dir()?;

    let gold: Vec<Explanation> = test_set
        .instances()
        .iter()
        .map(|inst| ground_truth_features(&model, test_set.schema(), inst, config.l))
        .collect::<Result<_>>()?;

    let mode = match config.counterfactual.mode {
        CfMode::Discrete => SearchMode::Discrete {
            soft: config.counterfactual.soft,
        },
        CfMode::Continuous => SearchMode::Continuous(OptimizerConfig {
            alpha: config.counterfactual.alpha,
            step_size: config.counterfactual.step_size,
            max_iters: config.counterfactual.max_iters,
            init_noise_scale: config.counterfactual.init_noise_scale,
            seed: 0, // overwritten per instance by the batch
        }),
    };
    let batch = BatchConfig {
        mode,
        metric: config.evaluate.distance,
        seed: config.seed,
    };

    let mut all_scores = Vec::new();
    let mut trace_dump = String::new();
    for name in &config.explainers.names {
        let path = explanation_path(&run_dir, name);
        if !path.exists() {
            return Err(Error::Config(format!(
                "no explanations at {}; run `explain` first",
                path.display()
            )));
        }
        let explanations =
            read_explanations(&path, test_set.schema().feature_count(), test_set.len())?;
        let results = batch_counterfactuals(&model, &test_set, &explanations, &batch)?;
        if config.evaluate.dump_traces {
            trace_dump.push_str(&format!("# {name}\n"));
            trace_dump.push_str(&crate::counterfactual::dump_traces(&results));
        }
        let ground_truth_fraction = recovery_fraction(&explanations, &gold)?;
        let per_mode = config
            .evaluate
            .removal_modes
            .iter()
            .map(|&removal_mode| -> Result<MethodScores> {
                Ok(MethodScores {
                    validity: validity(&results)?,
                    proximity: proximity(&results)?,
                    ces: ces(&results)?,
                    validity_soft: validity_soft(&results)?,
                    ces_soft: ces_soft(&results)?,
                    comp: comprehensiveness(&model, &test_set, &explanations, removal_mode)?,
                    suff: sufficiency(&model, &test_set, &explanations, removal_mode)?,
                    dfr: dfr(&model, &test_set, &explanations, removal_mode)?,
                    ground_truth_fraction,
                    removal_mode,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        all_scores.push(ExplainerScores {
            name: name.clone(),
            per_mode,
        });
    }

    let snapshot = serde_json::to_value(config)
        .map_err(|e| Error::Config(format!("config snapshot: {e}")))?;
    let report = build_report(
        &config.dataset_id(),
        config.counterfactual.mode.tag(),
        config.l,
        &all_scores,
        snapshot,
    )?;
    let mut paths = emit_all(&report, &run_dir)?;
    if config.evaluate.dump_traces {
        let trace_path = run_dir.join("traces.txt");
        std::fs::write(&trace_path, trace_dump).map_err(io_err(&trace_path))?;
        paths.push(trace_path);
    }
    Ok((report, paths))
}

#[derive(Debug, Serialize)]
pub struct FullSummary {
    pub train: TrainSummary,
    pub explanation_files: Vec<PathBuf>,
    pub report_files: Vec<PathBuf>,
    pub run_dir: PathBuf,
}

/// train -> explain -> evaluate under a single run directory.
pub fn cmd_full(config: &RunConfig) -> Result<FullSummary> {
    let train = cmd_train(config)?;
    let explanation_files = cmd_explain(config)?;
    let (_, report_files) = cmd_evaluate(config)?;
    Ok(FullSummary {
        train,
        explanation_files,
        report_files,
        run_dir: config.run_dir()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_config(dir: &Path, seed: u64) -> RunConfig {
        RunConfig {
            seed,
            out_dir: dir.to_path_buf(),
            l: 1,
            dataset: DatasetConfig::Synthetic {
                features: vec![SyntheticFeature::Categorical { vocab_size: 3 }; 4],
                n_instances: 300,
                weight_scale: 1.5,
            },
            train: TrainConfig {
                learning_rate: 1.0,
                epochs: 1500,
                l2: 1e-5,
            },
            explainers: ExplainersConfig {
                names: vec!["whitebox".into(), "omission".into(), "random".into()],
                lime: LimeSettings::default(),
                decision_boundary: DecisionBoundarySettings::default(),
                external: vec![],
            },
            counterfactual: CounterfactualConfig::default(),
            evaluate: EvaluateConfig::default(),
        }
    }

    #[test]
    fn split_is_80_10_10_and_seeded() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = synthetic_config(dir.path(), 5);
        let a = prepare_data(&cfg).unwrap();
        assert_eq!(a.train_indices.len(), 240);
        assert_eq!(a.val_indices.len(), 30);
        assert_eq!(a.test_indices.len(), 30);
        let b = prepare_data(&cfg).unwrap();
        assert_eq!(a.train_indices, b.train_indices);
        assert_eq!(a.test_indices, b.test_indices);
        let mut all: Vec<usize> = a
            .train_indices
            .iter()
            .chain(&a.val_indices)
            .chain(&a.test_indices)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..300).collect::<Vec<_>>());
    }

    #[test]
    fn labels_are_learnable_on_synthetic_data() {
        // the labels come from a planted logistic model, so training should
        // recover them almost perfectly
        let dir = tempfile::tempdir().unwrap();
        let cfg = synthetic_config(dir.path(), 7);
        let summary = cmd_train(&cfg).unwrap();
        assert!(
            summary.test_accuracy >= 0.95,
            "test accuracy {}",
            summary.test_accuracy
        );
        assert!(summary.model_path.exists());
    }

    #[test]
    fn train_rerun_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = synthetic_config(dir.path(), 7);
        let a = cmd_train(&cfg).unwrap();
        let b = cmd_train(&cfg).unwrap();
        assert_eq!(a.final_loss.to_bits(), b.final_loss.to_bits());
        assert_eq!(a.test_accuracy, b.test_accuracy);
    }

    #[test]
    fn evaluate_before_train_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = synthetic_config(dir.path(), 9);
        match cmd_evaluate(&cfg).unwrap_err() {
            Error::Config(msg) => assert!(msg.contains("train"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn explain_writes_one_file_per_explainer_with_l_indices_per_line() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = synthetic_config(dir.path(), 11);
        cmd_train(&cfg).unwrap();
        let paths = cmd_explain(&cfg).unwrap();
        assert_eq!(paths.len(), 3);
        for path in &paths {
            let text = std::fs::read_to_string(path).unwrap();
            let lines: Vec<&str> = text.lines().collect();
            assert_eq!(lines.len(), 30, "one line per test instance");
            for line in lines {
                assert_eq!(line.split_whitespace().count(), 1, "L=1 index per line");
            }
        }
        // rerun produces identical bytes
        let before: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        cmd_explain(&cfg).unwrap();
        let after: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn full_run_produces_all_artifacts_and_a_sane_report() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = synthetic_config(dir.path(), 13);
        let summary = cmd_full(&cfg).unwrap();
        for file in ["model.txt", "report.json", "table1.md", "table2.md", "scores.csv"] {
            assert!(summary.run_dir.join(file).exists(), "{file} missing");
        }
        let (report, _) = cmd_evaluate(&cfg).unwrap();
        // whitebox explains itself: full recovery, first on the gold row
        let wb = report.explainers.iter().position(|n| n == "whitebox").unwrap();
        let gt_row = report
            .rows
            .iter()
            .find(|r| r.metric == crate::report::GROUND_TRUTH_ROW)
            .unwrap();
        assert_eq!(gt_row.values[wb], 1.0);
        assert_eq!(gt_row.ranks.as_ref().unwrap()[wb], 1.0);
    }

    #[test]
    fn full_rerun_reproduces_report_json_byte_for_byte() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = synthetic_config(dir.path(), 17);
        let s1 = cmd_full(&cfg).unwrap();
        let bytes1 = std::fs::read(s1.run_dir.join("report.json")).unwrap();
        let s2 = cmd_full(&cfg).unwrap();
        let bytes2 = std::fs::read(s2.run_dir.join("report.json")).unwrap();
        assert_eq!(bytes1, bytes2);
    }

    #[test]
    fn continuous_mode_on_categorical_schema_fails_before_compute() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = synthetic_config(dir.path(), 23);
        cmd_train(&cfg).unwrap();
        cmd_explain(&cfg).unwrap();
        cfg.counterfactual.mode = CfMode::Continuous;
        // fresh run dir because the config changed; retrain there
        cmd_train(&cfg).unwrap();
        cmd_explain(&cfg).unwrap();
        match cmd_evaluate(&cfg).unwrap_err() {
            Error::Config(msg) => assert!(msg.contains("continuous mode"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn discrete_mode_on_embedded_schema_fails_before_compute() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = synthetic_config(dir.path(), 23);
        cfg.dataset = DatasetConfig::Synthetic {
            features: vec![SyntheticFeature::Embedded { dim: 3, vocab_size: 4 }; 3],
            n_instances: 200,
            weight_scale: 1.0,
        };
        cmd_train(&cfg).unwrap();
        cmd_explain(&cfg).unwrap();
        match cmd_evaluate(&cfg).unwrap_err() {
            Error::Config(msg) => assert!(msg.contains("discrete mode"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_labels_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let schema_path = dir.path().join("schema.toml");
        std::fs::write(
            &schema_path,
            "[[feature]]\nname = \"a\"\nkind = \"categorical\"\nvalues = [\"x\", \"y\"]\n",
        )
        .unwrap();
        let csv_path = dir.path().join("data.csv");
        let mut rows = String::from("a\n");
        for i in 0..20 {
            rows.push_str(if i % 2 == 0 { "x\n" } else { "y\n" });
        }
        std::fs::write(&csv_path, rows).unwrap();
        let mut cfg = synthetic_config(dir.path(), 29);
        cfg.dataset = DatasetConfig::Tabular {
            csv: csv_path,
            schema: schema_path,
        };
        match cmd_train(&cfg).unwrap_err() {
            Error::AtInstance { source, .. } => {
                assert!(matches!(*source, Error::MissingColumn(_)))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn adding_an_explainer_never_perturbs_another() {
        // per-instance RNG streams hang off (seed, explainer tag, index),
        // so the random explainer's output cannot depend on who else ran
        let dir = tempfile::tempdir().unwrap();
        let mut small = synthetic_config(dir.path(), 43);
        small.explainers.names = vec!["whitebox".into(), "random".into()];
        cmd_train(&small).unwrap();
        cmd_explain(&small).unwrap();
        let small_random =
            std::fs::read(explanation_path(&small.run_dir().unwrap(), "random")).unwrap();

        let mut big = synthetic_config(dir.path(), 43);
        big.explainers.names = vec![
            "whitebox".into(),
            "omission".into(),
            "lime".into(),
            "random".into(),
        ];
        cmd_train(&big).unwrap();
        cmd_explain(&big).unwrap();
        let big_random =
            std::fs::read(explanation_path(&big.run_dir().unwrap(), "random")).unwrap();
        assert_eq!(small_random, big_random);
    }

    #[test]
    fn dump_traces_writes_an_audit_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = synthetic_config(dir.path(), 47);
        cfg.evaluate.dump_traces = true;
        cmd_train(&cfg).unwrap();
        cmd_explain(&cfg).unwrap();
        let (_, paths) = cmd_evaluate(&cfg).unwrap();
        let trace = paths.iter().find(|p| p.ends_with("traces.txt")).unwrap();
        let text = std::fs::read_to_string(trace).unwrap();
        assert!(text.contains("# whitebox"));
        assert!(text.contains("instance 0:"));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = synthetic_config(dir.path(), 31);
        let text = toml::to_string(&cfg).unwrap();
        let parsed: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn run_dir_tracks_config_content() {
        let dir = tempfile::tempdir().unwrap();
        let a = synthetic_config(dir.path(), 1);
        let mut b = synthetic_config(dir.path(), 1);
        assert_eq!(a.run_dir().unwrap(), b.run_dir().unwrap());
        b.seed = 2;
        assert_ne!(a.run_dir().unwrap(), b.run_dir().unwrap());
    }

    #[test]
    fn unknown_explainer_is_rejected_at_validation() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = synthetic_config(dir.path(), 37);
        cfg.explainers.names.push("anchor".into());
        assert!(matches!(cfg.validate().unwrap_err(), Error::Config(_)));
        cfg.explainers.external.push(ExternalSource {
            name: "anchor".into(),
            path: dir.path().join("anchor.txt"),
        });
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn external_explanations_flow_through_the_pipeline() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = synthetic_config(dir.path(), 41);
        let ext_path = dir.path().join("anchor.txt");
        // one valid single-feature explanation per test instance
        let mut body = String::new();
        for i in 0..30 {
            body.push_str(&format!("{}\n", i % 4));
        }
        std::fs::write(&ext_path, body).unwrap();
        cfg.explainers.names.push("anchor".into());
        cfg.explainers.external.push(ExternalSource {
            name: "anchor".into(),
            path: ext_path,
        });
        let summary = cmd_full(&cfg).unwrap();
        let report_text =
            std::fs::read_to_string(summary.run_dir.join("report.json")).unwrap();
        let report: EvaluationReport = serde_json::from_str(&report_text).unwrap();
        assert!(report.explainers.iter().any(|n| n == "anchor"));
    }
}
