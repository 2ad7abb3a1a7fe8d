//! Generate a seeded synthetic benchmark, train the whitebox logistic
//! regression on its planted labels, and round-trip the model through its
//! text format.
//!
//! ```bash
//! cargo run --example synthetic_quickstart
//! ```

use cfeval::blackbox::{accuracy, train_logistic, LogisticModel, TrainConfig};
use cfeval::dataset::{synthesize, SyntheticSpec};

fn main() {
    // 5 categorical features, 4 values each, 400 instances
    let spec = SyntheticSpec::categorical(5, 4, 400, 1.5);
    let (dataset, planted) = synthesize(&spec, 42).expect("valid spec");
    let labels = dataset.labels().expect("synthetic data is labeled");
    let positives: usize = labels.iter().map(|&y| y as usize).sum();
    println!(
        "dataset: N={} M={} width={} ({} positive labels)",
        dataset.len(),
        dataset.schema().feature_count(),
        dataset.schema().width(),
        positives
    );

    let cfg = TrainConfig {
        learning_rate: 1.0,
        epochs: 1000,
        l2: 1e-5,
    };
    let outcome = train_logistic(&dataset, &labels, &cfg).expect("trainable");
    println!("final training loss: {:.6}", outcome.final_loss);
    println!(
        "training accuracy:   {:.4}",
        accuracy(&outcome.model, &dataset, &labels).expect("aligned")
    );

    // the planted model generated the labels, so the trained one should
    // agree with it almost everywhere
    let mut agree = 0;
    for inst in dataset.instances() {
        let rep = dataset.schema().encode(inst).expect("valid");
        let a = outcome.model.predict(&rep).expect("fits").label;
        let b = planted.predict(&rep).expect("fits").label;
        agree += usize::from(a == b);
    }
    println!(
        "agreement with the planted model: {}/{}",
        agree,
        dataset.len()
    );

    let path = std::env::temp_dir().join("cfeval-quickstart-model.txt");
    outcome
        .model
        .save(&path, dataset.schema())
        .expect("writable temp dir");
    let (reloaded, fingerprint) = LogisticModel::load(&path).expect("round trip");
    assert_eq!(reloaded.weights(), outcome.model.weights());
    println!(
        "model saved to {} (schema fingerprint {fingerprint:016x}) and reloaded bit-exactly",
        path.display()
    );
}
