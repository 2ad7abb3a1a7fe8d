//! The whole pipeline in one call: train the whitebox, run every configured
//! explainer on the test split, search counterfactuals, and emit the report
//! files. Rerunning the same config reproduces report.json byte for byte.
//!
//! ```bash
//! cargo run --example full_run
//! ```

use cfeval::pipeline::{
    cmd_full, CounterfactualConfig, DatasetConfig, EvaluateConfig, ExplainersConfig,
    LimeSettings, RunConfig,
};
use cfeval::blackbox::TrainConfig;
use cfeval::dataset::SyntheticFeature;

fn main() {
    let out_dir = std::env::temp_dir().join("cfeval-full-run-example");
    let config = RunConfig {
        seed: 1234,
        out_dir,
        l: 1,
        dataset: DatasetConfig::Synthetic {
            features: vec![SyntheticFeature::Categorical { vocab_size: 4 }; 5],
            n_instances: 500,
            weight_scale: 1.5,
        },
        train: TrainConfig {
            learning_rate: 1.0,
            epochs: 1000,
            l2: 1e-5,
        },
        explainers: ExplainersConfig {
            names: vec![
                "whitebox".into(),
                "omission".into(),
                "lime".into(),
                "random".into(),
            ],
            lime: LimeSettings {
                n_samples: 100,
                ..Default::default()
            },
            decision_boundary: Default::default(),
            external: vec![],
        },
        counterfactual: CounterfactualConfig::default(),
        evaluate: EvaluateConfig::default(),
    };

    let summary = cmd_full(&config).expect("pipeline runs");
    println!("run directory: {}", summary.run_dir.display());
    println!(
        "whitebox accuracy: train {:.3}  val {:.3}  test {:.3}",
        summary.train.train_accuracy, summary.train.val_accuracy, summary.train.test_accuracy
    );
    println!("artifacts:");
    for path in &summary.report_files {
        println!("  {}", path.display());
    }

    let table = std::fs::read_to_string(summary.run_dir.join("table1.md")).expect("emitted");
    println!("\n{table}");
    let correlations = std::fs::read_to_string(summary.run_dir.join("table2.md")).expect("emitted");
    println!("{correlations}");
}
