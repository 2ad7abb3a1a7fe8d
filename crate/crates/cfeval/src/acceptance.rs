//! The acceptance gate: every criterion the artifact must satisfy, runnable
//! in-process by the `selfcheck` subcommand and asserted one by one in the
//! acceptance test suite.

use crate::blackbox::{recovery_fraction, LogisticModel};
use crate::counterfactual::{
    batch_counterfactuals, continuous_search, discrete_search, BatchConfig, DistanceMetric,
    OptimizerConfig, SearchMode,
};
use crate::dataset::{
    synthesize, Dataset, FeatureKind, FeatureSchema, FeatureSpec, Instance, SyntheticFeature,
    SyntheticSpec,
};
use crate::explainers::{
    explain_dataset, Explainer, Explanation, LimeConfig, LimeExplainer, OmissionExplainer,
    RandomExplainer, WhiteboxSelfExplainer,
};
use crate::metrics::{ces, dfr, proximity, validity, RemovalMode};
use crate::pipeline::{
    cmd_full, CounterfactualConfig, DatasetConfig, EvaluateConfig, ExplainersConfig,
    LimeSettings, RunConfig,
};
use crate::rankstats::{kendall_tau, rank, spearman_rho, Direction};
use crate::seed::rng_for;
use rand::Rng;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2}: {} - {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

/// Run every acceptance criterion in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        criterion_1_correlation_table_reproduction(),
        criterion_2_one_hot_proximity(),
        criterion_3_ces_consistency(),
        criterion_4_discrete_oracle_equivalence(),
        criterion_5_gradient_correctness(),
        criterion_6_optimizer_sanity(),
        criterion_7_end_to_end_ranking(),
        criterion_8_rank_statistic_oracle(),
        criterion_9_full_run_determinism(),
        criterion_10_known_typos_documented(),
    ]
}

fn outcome(id: usize, name: &'static str, passed: bool, detail: String) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
    }
}

// Reference ranking columns from a published six-explainer comparison
// (random, omission, lime, anchor, decision boundary, whitebox); 1 = best.
// One benchmark is tabular with categorical features, one is text with
// embedded tokens.
const GT_TABULAR: [f64; 6] = [6.0, 5.0, 2.0, 4.0, 3.0, 1.0];
const GT_TEXT: [f64; 6] = [5.0, 6.0, 3.0, 2.0, 4.0, 1.0];

/// Criterion 1: feeding the published ranking columns into the rank
/// statistics reproduces the published correlation table to 1e-3.
pub fn criterion_1_correlation_table_reproduction() -> CriterionOutcome {
    type Case = (&'static str, [f64; 6], [f64; 6], f64, f64);
    let cases: [Case; 4] = [
        ("tabular dfr", [5.0, 6.0, 4.0, 3.0, 1.0, 2.0], GT_TABULAR, 0.4667, 0.6571),
        ("tabular comp(del.)", [6.0, 5.0, 4.0, 3.0, 2.0, 1.0], GT_TABULAR, 0.7333, 0.8285),
        // the printed "10" for this tau is read as 1.0 (criterion 10)
        ("tabular c(disc.)", [6.0, 5.0, 2.0, 4.0, 3.0, 1.0], GT_TABULAR, 1.0, 1.0),
        ("text c(cont.)", [6.0, 5.0, 3.0, 2.0, 4.0, 1.0], GT_TEXT, 0.8666, 0.9428),
    ];
    let mut details = Vec::new();
    let mut passed = true;
    for (label, ranks, gt, want_tau, want_rho) in cases {
        let tau = kendall_tau(&ranks, &gt).expect("valid inputs");
        let rho = spearman_rho(&ranks, &gt).expect("valid inputs");
        let ok = (tau - want_tau).abs() <= 1e-3 && (rho - want_rho).abs() <= 1e-3;
        passed &= ok;
        details.push(format!("{label}: tau {tau:.4}/{want_tau}, rho {rho:.4}/{want_rho}"));
    }
    outcome(
        1,
        "published correlation table reproduction",
        passed,
        details.join("; "),
    )
}

/// Criterion 2: single-categorical-feature edits sit at distance sqrt(2)
/// and the dataset proximity at 1.4142 within 1e-6.
pub fn criterion_2_one_hot_proximity() -> CriterionOutcome {
    let spec = SyntheticSpec::categorical(5, 4, 120, 1.5);
    let (dataset, model) = synthesize(&spec, 2024).expect("valid spec");
    let explanations: Vec<Explanation> = (0..dataset.len())
        .map(|i| Explanation::new(vec![i % 5], 5).expect("valid explanation"))
        .collect();
    let batch = BatchConfig {
        mode: SearchMode::Discrete { soft: false },
        metric: DistanceMetric::Euclidean,
        seed: 7,
    };
    let results = batch_counterfactuals(&model, &dataset, &explanations, &batch)
        .expect("search succeeds");
    let per_instance_ok = results
        .iter()
        .all(|r| (r.distance - std::f64::consts::SQRT_2).abs() <= 1e-9);
    let prox = proximity(&results).expect("nonempty");
    // the tables print the constant as 1.414; the value itself is sqrt(2)
    let prox_ok = (prox - std::f64::consts::SQRT_2).abs() <= 1e-6;
    let prints_as_table_constant = format!("{prox:.4}") == "1.4142";
    outcome(
        2,
        "one-hot proximity is the constant sqrt(2)",
        per_instance_ok && prox_ok && prints_as_table_constant,
        format!("proximity {prox:.7} (prints as 1.4142), every edit at sqrt(2): {per_instance_ok}"),
    )
}

/// Criterion 3: the reference Validity/Proximity ratio lands within print
/// rounding of its published score, and internally CES always equals
/// validity/proximity to 1e-12.
pub fn criterion_3_ces_consistency() -> CriterionOutcome {
    let published = 0.0682 / std::f64::consts::SQRT_2;
    let published_ok = (published - 0.0483).abs() <= 2e-4;

    let spec = SyntheticSpec::categorical(4, 3, 150, 1.5);
    let (dataset, model) = synthesize(&spec, 99).expect("valid spec");
    let explanations: Vec<Explanation> = (0..dataset.len())
        .map(|i| Explanation::new(vec![i % 4], 4).expect("valid explanation"))
        .collect();
    let batch = BatchConfig {
        mode: SearchMode::Discrete { soft: false },
        metric: DistanceMetric::Euclidean,
        seed: 3,
    };
    let results =
        batch_counterfactuals(&model, &dataset, &explanations, &batch).expect("search succeeds");
    let c = ces(&results).expect("nonzero distances");
    let v = validity(&results).expect("nonempty");
    let p = proximity(&results).expect("nonempty");
    let internal_ok = (c - v / p).abs() <= 1e-12 * c.abs().max(1.0);
    outcome(
        3,
        "ces equals validity over proximity",
        published_ok && internal_ok,
        format!(
            "0.0682/sqrt(2) = {published:.4} vs printed 0.0483; run: |ces - v/p| = {:.2e}",
            (c - v / p).abs()
        ),
    )
}

/// Criterion 4: on 50 seeded instances the discrete search reports a flip
/// exactly when brute-force enumeration of the full product finds one.
pub fn criterion_4_discrete_oracle_equivalence() -> CriterionOutcome {
    let start = Instant::now();
    let mut agreements = 0;
    let mut total = 0;
    for seed in 0..50u64 {
        let m = 3 + (seed % 3) as usize; // M in 3..=5
        let vocab = 2 + (seed % 3) as usize; // vocab in 2..=4
        let l = 1 + (seed % 2) as usize; // L in 1..=2
        let spec = SyntheticSpec::categorical(m, vocab, 1, 1.3);
        let (dataset, model) = synthesize(&spec, 1000 + seed).expect("valid spec");
        let instance = &dataset.instances()[0];
        let schema = dataset.schema();
        let explained: Vec<usize> = (0..l).map(|k| (seed as usize + k) % m).collect();
        let explanation = Explanation::new(explained.clone(), m).expect("valid explanation");

        let result = discrete_search(&model, schema, instance, &explanation, false, seed)
            .expect("search succeeds");

        // independent oracle: walk the whole product
        let original_label = model
            .predict(&schema.encode(instance).expect("valid instance"))
            .expect("fits model")
            .label;
        let mut oracle_flip = false;
        let mut assignment = vec![0usize; l];
        'outer: loop {
            let original: Vec<usize> = explained.iter().map(|&j| instance.values[j]).collect();
            if assignment != original {
                let mut cand = instance.clone();
                for (k, &j) in explained.iter().enumerate() {
                    cand.values[j] = assignment[k];
                }
                let pred = model
                    .predict(&schema.encode(&cand).expect("valid candidate"))
                    .expect("fits model");
                if pred.label != original_label {
                    oracle_flip = true;
                }
            }
            let mut k = l;
            loop {
                if k == 0 {
                    break 'outer;
                }
                k -= 1;
                assignment[k] += 1;
                if assignment[k] < vocab {
                    break;
                }
                assignment[k] = 0;
            }
        }
        total += 1;
        agreements += usize::from(result.flipped == oracle_flip);
    }
    let elapsed = start.elapsed();
    outcome(
        4,
        "discrete search agrees with brute-force flip oracle",
        agreements == total && elapsed.as_secs() < 5,
        format!("{agreements}/{total} agree in {elapsed:.2?}"),
    )
}

/// Criterion 5: the analytic gradient of the relaxed objective matches
/// central finite differences to relative error 1e-4 over 100 draws.
pub fn criterion_5_gradient_correctness() -> CriterionOutcome {
    let start = Instant::now();
    let mut rng = rng_for(4242, "acceptance-gradient", 0);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for _ in 0..100 {
        let dim = rng.random_range(2..6);
        let spec = SyntheticSpec {
            features: vec![SyntheticFeature::Embedded {
                dim,
                vocab_size: 3,
            }],
            n_instances: 1,
            weight_scale: 0.0,
        };
        let (dataset, _) = synthesize(&spec, rng.random_range(0..10_000)).expect("valid spec");
        let schema = dataset.schema();
        let weights: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let model =
            LogisticModel::new(weights, rng.random_range(-1.0..1.0)).expect("finite weights");
        let alpha: f64 = rng.random_range(0.1..5.0);
        let original = schema
            .encode(&dataset.instances()[0])
            .expect("valid instance");
        let label = model.predict(&original).expect("fits").label;
        let mut point = original.clone();
        for v in &mut point.values {
            *v += rng.random_range(-0.5..0.5);
        }
        let objective = |values: &[f64]| -> f64 {
            let prox: f64 = values
                .iter()
                .zip(&original.values)
                .map(|(x, o)| (x - o) * (x - o))
                .sum();
            let rep = crate::dataset::Representation {
                values: values.to_vec(),
                spans: original.spans.clone(),
            };
            prox + alpha * model.predict(&rep).expect("fits").probs[label as usize]
        };
        let prob_grad = model.gradient(&point, label).expect("fits");
        for i in 0..dim {
            let analytic = 2.0 * (point.values[i] - original.values[i]) + alpha * prob_grad[i];
            let h = 1e-5;
            let mut plus = point.values.clone();
            plus[i] += h;
            let mut minus = point.values.clone();
            minus[i] -= h;
            let fd = (objective(&plus) - objective(&minus)) / (2.0 * h);
            let rel = (analytic - fd).abs() / fd.abs().max(1e-8);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        5,
        "objective gradient matches finite differences",
        worst <= 1e-4 && elapsed.as_secs() < 5,
        format!("{checked} components, worst relative error {worst:.2e} in {elapsed:.2?}"),
    )
}

/// Criterion 6: alpha = 0 contracts toward the original; a large alpha on a
/// planted 2-D model crosses the boundary.
pub fn criterion_6_optimizer_sanity() -> CriterionOutcome {
    let spec = SyntheticSpec {
        features: vec![SyntheticFeature::Embedded {
            dim: 2,
            vocab_size: 3,
        }],
        n_instances: 1,
        weight_scale: 0.0,
    };
    let (dataset, _) = synthesize(&spec, 77).expect("valid spec");
    let schema = dataset.schema();
    let instance = &dataset.instances()[0];
    let explanation = Explanation::new(vec![0], 1).expect("valid explanation");

    // contraction: alpha = 0 pulls the noisy start back to the original
    let model = LogisticModel::new(vec![0.8, -0.6], 0.3).expect("finite weights");
    let cfg = OptimizerConfig {
        alpha: 0.0,
        init_noise_scale: 0.05,
        seed: 5,
        ..OptimizerConfig::default()
    };
    let contracted =
        continuous_search(&model, schema, instance, &explanation, &cfg).expect("search succeeds");
    let init_distance = contracted.objective_trace[0].sqrt();
    let contraction_ok = contracted.distance <= init_distance && !contracted.flipped;

    // boundary crossing: weights aligned with the original embedding give a
    // confident prediction that a large alpha must overturn
    let emb = match &schema.feature(0).kind {
        FeatureKind::Embedded { vectors, .. } => vectors[instance.values[0]].clone(),
        _ => unreachable!(),
    };
    let norm2: f64 = emb.iter().map(|x| x * x).sum();
    let aligned: Vec<f64> = emb.iter().map(|x| x * 2.0 / norm2).collect(); // logit = 2
    let confident = LogisticModel::new(aligned, 0.0).expect("finite weights");
    let cfg = OptimizerConfig {
        alpha: 50.0,
        seed: 6,
        ..OptimizerConfig::default()
    };
    let crossed =
        continuous_search(&confident, schema, instance, &explanation, &cfg).expect("search succeeds");
    let crossing_ok =
        crossed.flipped && crossed.probs[crossed.original_label as usize] < 0.5;

    outcome(
        6,
        "optimizer contracts at alpha=0 and flips at large alpha",
        contraction_ok && crossing_ok,
        format!(
            "alpha=0: distance {:.2e} <= init {:.2e}; alpha=50: flipped={} p_cf={:.3}",
            contracted.distance,
            init_distance,
            crossed.flipped,
            crossed.probs[crossed.original_label as usize]
        ),
    )
}

/// The seeded benchmark for criterion 7: six categorical features where
/// feature 0 is a graded switch (levels -A2, -A1, +A1, +A2) and the other
/// five are weak one-sided context features, plus a bias centering the
/// context mass. The switch is every instance's top-|effect| feature and can
/// always flip the label, while the contexts' flip room is capped, so the
/// gold explanation is genuinely the most counterfactually potent one.
pub fn ranking_benchmark(seed: u64) -> (Dataset, LogisticModel) {
    const M: usize = 6;
    const VOCAB: usize = 4;
    let mut rng = rng_for(seed, "ranking-benchmark", 0);
    let features: Vec<FeatureSpec> = (0..M)
        .map(|j| FeatureSpec {
            name: format!("f{j}"),
            kind: FeatureKind::Categorical {
                vocabulary: (0..VOCAB).map(|v| format!("v{v}")).collect(),
            },
        })
        .collect();
    let schema = FeatureSchema::new(features).expect("valid schema");

    let mut weights = vec![0.0; schema.width()];
    let switch = schema.span(0);
    weights[switch.start] = -4.0;
    weights[switch.start + 1] = -1.0;
    weights[switch.start + 2] = 1.0;
    weights[switch.start + 3] = 4.0;
    let mut context_sum = 0.0;
    for j in 1..M {
        let g: f64 = rng.random_range(0.5..0.8);
        let span = schema.span(j);
        for v in 1..VOCAB {
            weights[span.start + v] = g;
        }
        context_sum += g;
    }
    let bias = 1.0 - 0.75 * context_sum;
    let model = LogisticModel::new(weights, bias).expect("finite weights");

    let instances: Vec<Instance> = (0..200)
        .map(|_| Instance::new((0..M).map(|_| rng.random_range(0..VOCAB)).collect()))
        .collect();
    let dataset = Dataset::new(schema, instances).expect("valid dataset");
    (dataset, model)
}

/// Criterion 7: across ten seeded benchmarks the CES ranking puts the
/// whitebox first and random last in at least nine, and CES tracks the
/// ground truth at least as well as DFR on average.
pub fn criterion_7_end_to_end_ranking() -> CriterionOutcome {
    let start = Instant::now();
    let l = 1;
    let mut good_seeds = 0;
    let mut tau_ces_sum = 0.0;
    let mut tau_dfr_sum = 0.0;
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
            .map(|inst| {
                crate::blackbox::ground_truth_features(&model, dataset.schema(), inst, l)
                    .expect("valid")
            })
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
                explain_dataset(explainer.as_ref(), &model, &dataset, l).expect("explains");
            let results = batch_counterfactuals(&model, &dataset, &explanations, &batch)
                .expect("search succeeds");
            ces_values.push(ces(&results).expect("nonzero distance"));
            dfr_values.push(
                dfr(&model, &dataset, &explanations, RemovalMode::Delete).expect("nonempty"),
            );
            gt_values.push(recovery_fraction(&explanations, &gold).expect("aligned"));
        }
        let ces_ranks = rank(&ces_values, Direction::HigherBetter).expect("nonempty");
        let gt_ranks = rank(&gt_values, Direction::HigherBetter).expect("nonempty");
        let dfr_ranks = rank(&dfr_values, Direction::HigherBetter).expect("nonempty");
        let whitebox_first = ces_ranks[0] == 1.0;
        let random_last = ces_ranks[3] == 4.0;
        good_seeds += usize::from(whitebox_first && random_last);
        tau_ces_sum += kendall_tau(&ces_ranks, &gt_ranks).expect("computable");
        tau_dfr_sum += kendall_tau(&dfr_ranks, &gt_ranks).expect("computable");
    }
    let elapsed = start.elapsed();
    let mean_tau_ces = tau_ces_sum / 10.0;
    let mean_tau_dfr = tau_dfr_sum / 10.0;
    outcome(
        7,
        "ces ranks whitebox first and tracks ground truth better than dfr",
        good_seeds >= 9 && mean_tau_ces >= mean_tau_dfr && elapsed.as_secs() < 120,
        format!(
            "whitebox-first-and-random-last {good_seeds}/10; mean tau ces {mean_tau_ces:.3} vs dfr {mean_tau_dfr:.3}; {elapsed:.2?}"
        ),
    )
}

/// Criterion 8: both statistics match independently written definitional
/// oracles exactly on all 720 permutations of n = 6.
pub fn criterion_8_rank_statistic_oracle() -> CriterionOutcome {
    fn oracle_tau(u: &[f64], v: &[f64]) -> f64 {
        let n = u.len();
        let mut sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                sum += (u[i] - u[j]).signum() * (v[i] - v[j]).signum();
            }
        }
        sum / (n * (n - 1) / 2) as f64
    }
    fn counting_ranks(v: &[f64]) -> Vec<f64> {
        v.iter()
            .map(|x| 1.0 + v.iter().filter(|y| *y < x).count() as f64)
            .collect()
    }
    fn oracle_rho(u: &[f64], v: &[f64]) -> f64 {
        let a = counting_ranks(u);
        let b = counting_ranks(v);
        let n = u.len() as f64;
        let d2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        1.0 - 6.0 * d2 / (n * (n * n - 1.0))
    }

    let base: Vec<f64> = (1..=6).map(f64::from).collect();
    let mut perm: Vec<f64> = base.clone();
    let mut counters = [0usize; 6];
    let mut total = 0;
    let mut exact = 0;
    // Heap's algorithm over the 720 permutations
    let mut check = |p: &[f64]| {
        total += 1;
        let tau = kendall_tau(&base, p).expect("computable");
        let rho = spearman_rho(&base, p).expect("computable");
        if tau == oracle_tau(&base, p) && rho == oracle_rho(&base, p) {
            exact += 1;
        }
    };
    check(&perm);
    let mut i = 0;
    while i < 6 {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            check(&perm);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    outcome(
        8,
        "rank statistics match brute-force oracles on all permutations",
        exact == total && total == 720,
        format!("{exact}/{total} permutations exact"),
    )
}

/// Criterion 9: running the full pipeline twice with one config yields a
/// byte-identical report.json.
pub fn criterion_9_full_run_determinism() -> CriterionOutcome {
    let dir = std::env::temp_dir().join(format!(
        "cfeval-selfcheck-{}",
        std::process::id()
    ));
    let config = RunConfig {
        seed: 2718,
        out_dir: dir.clone(),
        l: 1,
        dataset: DatasetConfig::Synthetic {
            features: vec![SyntheticFeature::Categorical { vocab_size: 3 }; 4],
            n_instances: 250,
            weight_scale: 1.5,
        },
        train: Default::default(),
        explainers: ExplainersConfig {
            names: vec![
                "whitebox".into(),
                "omission".into(),
                "lime".into(),
                "random".into(),
            ],
            lime: LimeSettings {
                n_samples: 40,
                ..Default::default()
            },
            decision_boundary: Default::default(),
            external: vec![],
        },
        counterfactual: CounterfactualConfig::default(),
        evaluate: EvaluateConfig::default(),
    };
    let run = || -> crate::Result<Vec<u8>> {
        let summary = cmd_full(&config)?;
        std::fs::read(summary.run_dir.join("report.json"))
            .map_err(crate::error::io_err(summary.run_dir.join("report.json")))
    };
    let result = (|| -> crate::Result<(Vec<u8>, Vec<u8>)> { Ok((run()?, run()?)) })();
    let _ = std::fs::remove_dir_all(&dir);
    match result {
        Ok((a, b)) => outcome(
            9,
            "full pipeline is byte-deterministic",
            a == b,
            format!("report.json identical across reruns: {} ({} bytes)", a == b, a.len()),
        ),
        Err(e) => outcome(9, "full pipeline is byte-deterministic", false, e.to_string()),
    }
}

/// Criterion 10: two known misprints in the reference tables are
/// documented as corrected readings, never asserted as targets.
pub fn criterion_10_known_typos_documented() -> CriterionOutcome {
    // Misprint A: the correlation table prints "10" for the discrete CES tau
    // on the tabular dataset; its rho is 1.0 and the column is marked best,
    // so it reads as 1.0. Criterion 1 asserts 1.0, never 10.
    let ranks = [6.0, 5.0, 2.0, 4.0, 3.0, 1.0];
    let tau = kendall_tau(&ranks, &GT_TABULAR).expect("computable");
    let reads_as_one = (tau - 1.0).abs() < 1e-12 && tau < 10.0;

    // Misprint B: the text-benchmark whitebox row prints Validity 0.1099,
    // but its CES 12.2585 at Proximity 0.0775 implies Validity around 0.95.
    // The two values are irreconcilable, so 0.1099 is not an anchor anywhere
    // in this suite.
    let implied_validity: f64 = 12.2585 * 0.0775;
    let inconsistent = (implied_validity - 0.1099).abs() > 0.5;

    outcome(
        10,
        "reference-table misprints are documented, not asserted",
        reads_as_one && inconsistent,
        format!(
            "c(disc.) tau computed as {tau:.1} (printed '10'); implied whitebox validity {implied_validity:.3} vs printed 0.1099"
        ),
    )
}
