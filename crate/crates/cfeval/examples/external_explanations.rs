//! Evaluate a third-party explainer without linking it: its explanations
//! are imported from a plain text file, one line of space-separated feature
//! indices per test instance.
//!
//! ```bash
//! cargo run --example external_explanations
//! ```

use cfeval::blackbox::{ground_truth_features, recovery_fraction};
use cfeval::counterfactual::{batch_counterfactuals, BatchConfig, DistanceMetric, SearchMode};
use cfeval::dataset::{synthesize, SyntheticSpec};
use cfeval::explainers::{explain_dataset, Explanation, ExternalExplainer};
use cfeval::metrics::{ces, validity};

fn main() {
    let spec = SyntheticSpec::categorical(5, 3, 100, 1.5);
    let (dataset, model) = synthesize(&spec, 14).expect("valid spec");
    let m = dataset.schema().feature_count();

    // stand-in for an external tool's output: it always blames feature 2
    let dir = std::env::temp_dir().join("cfeval-external-example");
    std::fs::create_dir_all(&dir).expect("writable temp dir");
    let path = dir.join("imported.txt");
    let lines: Vec<String> = (0..dataset.len()).map(|_| "2".to_owned()).collect();
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();

    let external =
        ExternalExplainer::from_file("imported", &path, m).expect("well-formed file");
    println!(
        "imported {} explanations for {} instances from {}",
        external.len(),
        dataset.len(),
        path.display()
    );

    let explanations =
        explain_dataset(&external, &model, &dataset, 1).expect("aligned with the dataset");
    let gold: Vec<Explanation> = dataset
        .instances()
        .iter()
        .map(|inst| ground_truth_features(&model, dataset.schema(), inst, 1).expect("valid"))
        .collect();
    let batch = BatchConfig {
        mode: SearchMode::Discrete { soft: false },
        metric: DistanceMetric::Euclidean,
        seed: 14,
    };
    let results =
        batch_counterfactuals(&model, &dataset, &explanations, &batch).expect("searchable");
    println!(
        "imported explainer: validity {:.3}  ces {:.3}  ground-truth recovery {:.3}",
        validity(&results).expect("nonempty"),
        ces(&results).expect("nonzero"),
        recovery_fraction(&explanations, &gold).expect("aligned"),
    );
    println!("(a single fixed feature rarely matches the per-instance gold set)");
}
