//! The seeded benchmark behind the acceptance gate's ranking criterion:
//! a planted model whose gold feature is genuinely the most flip-capable
//! one, so a faithful evaluation metric must put the whitebox first.
//!
//! ```bash
//! cargo run --example ranking_benchmark
//! ```

use cfeval::acceptance::ranking_benchmark;
use cfeval::blackbox::{ground_truth_features, recovery_fraction};
use cfeval::counterfactual::{batch_counterfactuals, BatchConfig, DistanceMetric, SearchMode};
use cfeval::explainers::{
    explain_dataset, Explainer, Explanation, LimeConfig, LimeExplainer, OmissionExplainer,
    RandomExplainer, WhiteboxSelfExplainer,
};
use cfeval::metrics::{ces, dfr, RemovalMode};
use cfeval::rankstats::{kendall_tau, rank, Direction};

fn main() {
    let mut tau_ces_total = 0.0;
    let mut tau_dfr_total = 0.0;
    println!("per-seed CES over {{whitebox, omission, lime, random}}:");
    for seed in 0..10u64 {
        let (dataset, model) = ranking_benchmark(seed);
        let explainers: Vec<Box<dyn Explainer>> = vec![
            Box::new(WhiteboxSelfExplainer),
            Box::new(OmissionExplainer),
            Box::new(LimeExplainer {
                cfg: LimeConfig {
                    n_samples: 12,
                    seed,
                    ..LimeConfig::default()
                },
            }),
            Box::new(RandomExplainer { seed }),
        ];
        let gold: Vec<Explanation> = dataset
            .instances()
            .iter()
            .map(|i| ground_truth_features(&model, dataset.schema(), i, 1).expect("valid"))
            .collect();
        let batch = BatchConfig {
            mode: SearchMode::Discrete { soft: false },
            metric: DistanceMetric::Euclidean,
            seed,
        };
        let mut ces_values = Vec::new();
        let mut dfr_values = Vec::new();
        let mut gt_values = Vec::new();
        for explainer in &explainers {
            let explanations =
                explain_dataset(explainer.as_ref(), &model, &dataset, 1).expect("explainable");
            let results = batch_counterfactuals(&model, &dataset, &explanations, &batch)
                .expect("searchable");
            ces_values.push(ces(&results).expect("nonzero"));
            dfr_values
                .push(dfr(&model, &dataset, &explanations, RemovalMode::Delete).expect("scorable"));
            gt_values.push(recovery_fraction(&explanations, &gold).expect("aligned"));
        }
        let gt_ranks = rank(&gt_values, Direction::HigherBetter).expect("valid");
        let ces_ranks = rank(&ces_values, Direction::HigherBetter).expect("valid");
        let dfr_ranks = rank(&dfr_values, Direction::HigherBetter).expect("valid");
        let tau_ces = kendall_tau(&ces_ranks, &gt_ranks).expect("valid");
        let tau_dfr = kendall_tau(&dfr_ranks, &gt_ranks).expect("valid");
        tau_ces_total += tau_ces;
        tau_dfr_total += tau_dfr;
        println!(
            "  seed {seed}: ces {:?} whitebox-rank {:.0} random-rank {:.0}  tau(ces) {tau_ces:+.2} tau(dfr) {tau_dfr:+.2}",
            ces_values
                .iter()
                .map(|v| (v * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>(),
            ces_ranks[0],
            ces_ranks[3],
        );
    }
    println!(
        "mean tau: ces {:+.3} vs dfr {:+.3}",
        tau_ces_total / 10.0,
        tau_dfr_total / 10.0
    );
}
