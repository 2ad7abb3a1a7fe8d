//! Contrast the two faithfulness-measurement families on the same
//! explanations: erasure (zero the explained span and watch the output)
//! versus counterfactual search (replace the explained values and ask for a
//! flip).
//!
//! ```bash
//! cargo run --example erasure_vs_counterfactual
//! ```

use cfeval::counterfactual::{batch_counterfactuals, BatchConfig, DistanceMetric, SearchMode};
use cfeval::dataset::{synthesize, SyntheticSpec};
use cfeval::explainers::Explanation;
use cfeval::metrics::{
    ces, comprehensiveness, dfr, erase, proximity, sufficiency, validity, RemovalMode,
};

fn main() {
    let spec = SyntheticSpec::categorical(4, 4, 200, 1.5);
    let (dataset, model) = synthesize(&spec, 21).expect("valid spec");
    let schema = dataset.schema();

    // explain feature 0 everywhere; vary how we interrogate the model
    let explanations: Vec<Explanation> = dataset
        .instances()
        .iter()
        .map(|_| Explanation::new(vec![0], 4).expect("valid"))
        .collect();

    // erasure family: ambiguity by construction, many inputs collapse onto
    // the same erased vector
    let comp = comprehensiveness(&model, &dataset, &explanations, RemovalMode::Delete)
        .expect("scorable");
    let suff = sufficiency(&model, &dataset, &explanations, RemovalMode::Delete).expect("scorable");
    let flip_ratio = dfr(&model, &dataset, &explanations, RemovalMode::Delete).expect("scorable");
    println!("erasure family (delete mode):");
    println!("  comprehensiveness {comp:+.4}");
    println!("  sufficiency       {suff:+.4}");
    println!("  decision flips    {flip_ratio:.4}");

    let rep = schema.encode(&dataset.instances()[0]).expect("valid");
    let erased = erase(&rep, &explanations[0], RemovalMode::Delete, schema);
    println!(
        "  (erasing feature 0 zeroes its span: {:?} -> {:?})",
        &rep.values[..4],
        &erased.values[..4]
    );

    // counterfactual family: stays on the data manifold of valid encodings
    let batch = BatchConfig {
        mode: SearchMode::Discrete { soft: false },
        metric: DistanceMetric::Euclidean,
        seed: 21,
    };
    let results =
        batch_counterfactuals(&model, &dataset, &explanations, &batch).expect("searchable");
    println!("counterfactual family (exhaustive search over feature 0):");
    println!("  validity  {:.4}", validity(&results).expect("nonempty"));
    println!("  proximity {:.4}", proximity(&results).expect("nonempty"));
    println!("  ces       {:.4}", ces(&results).expect("nonzero"));

    println!(
        "counterfactual search flipped {} instances; erasing the same feature flipped {}",
        results.iter().filter(|r| r.flipped).count(),
        (flip_ratio * dataset.len() as f64).round() as usize,
    );
}
