//! Run the whole explainer family over one dataset, score each method with
//! counterfactual and erasure metrics, and rank them against the whitebox
//! ground truth.
//!
//! ```bash
//! cargo run --example explainer_showdown
//! ```

use cfeval::blackbox::{ground_truth_features, recovery_fraction};
use cfeval::counterfactual::{BatchConfig, DistanceMetric, SearchMode};
use cfeval::dataset::{synthesize, SyntheticSpec};
use cfeval::explainers::{
    explain_dataset, DecisionBoundaryConfig, DecisionBoundaryExplainer, Explainer, Explanation,
    LimeConfig, LimeExplainer, OmissionExplainer, RandomExplainer, WhiteboxSelfExplainer,
};
use cfeval::metrics::{compute_method_scores, RemovalMode};
use cfeval::report::{build_report, ExplainerScores};

fn main() {
    let seed = 3;
    let l = 1;
    let spec = SyntheticSpec::categorical(6, 4, 300, 1.5);
    let (dataset, model) = synthesize(&spec, seed).expect("valid spec");

    let explainers: Vec<Box<dyn Explainer>> = vec![
        Box::new(WhiteboxSelfExplainer),
        Box::new(OmissionExplainer),
        Box::new(LimeExplainer {
            cfg: LimeConfig {
                n_samples: 100,
                seed,
                ..LimeConfig::default()
            },
        }),
        Box::new(DecisionBoundaryExplainer {
            cfg: DecisionBoundaryConfig {
                n_samples: 100,
                seed,
            },
        }),
        Box::new(RandomExplainer { seed }),
    ];

    let gold: Vec<Explanation> = dataset
        .instances()
        .iter()
        .map(|inst| ground_truth_features(&model, dataset.schema(), inst, l).expect("valid"))
        .collect();
    let batch = BatchConfig {
        mode: SearchMode::Discrete { soft: false },
        metric: DistanceMetric::Euclidean,
        seed,
    };

    let mut all_scores = Vec::new();
    for explainer in &explainers {
        let explanations =
            explain_dataset(explainer.as_ref(), &model, &dataset, l).expect("explainable");
        let gt = recovery_fraction(&explanations, &gold).expect("aligned");
        let scores = compute_method_scores(
            &model,
            &dataset,
            &explanations,
            gt,
            &batch,
            RemovalMode::Delete,
        )
        .expect("scorable");
        println!(
            "{:<18} validity {:.3}  ces {:.3}  comp {:+.3}  suff {:+.3}  dfr {:.3}  gt* {:.3}",
            explainer.name(),
            scores.validity,
            scores.ces,
            scores.comp,
            scores.suff,
            scores.dfr,
            scores.ground_truth_fraction
        );
        all_scores.push(ExplainerScores {
            name: explainer.name().to_owned(),
            per_mode: vec![scores],
        });
    }

    let report = build_report(
        "showdown",
        "discrete",
        l,
        &all_scores,
        serde_json::json!({ "seed": seed }),
    )
    .expect("reportable");
    println!("\nagreement with the ground-truth ranking:");
    for c in &report.correlations {
        println!("  {:<14} tau {:+.4}  rho {:+.4}", c.metric, c.tau, c.rho);
    }
}
