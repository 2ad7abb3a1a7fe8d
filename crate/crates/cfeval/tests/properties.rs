//! Property tests for the crate's core invariants.

use cfeval::blackbox::LogisticModel;
use cfeval::counterfactual::{discrete_search, distance, DistanceMetric};
use cfeval::dataset::{FeatureKind, FeatureSchema, FeatureSpec, Instance};
use cfeval::explainers::Explanation;
use cfeval::rankstats::{kendall_tau, spearman_rho};
use proptest::prelude::*;

fn rep_dot(x: &[f64], w: &[f64]) -> f64 {
    x.iter().zip(w).map(|(a, b)| a * b).sum()
}

fn categorical_schema(vocab_sizes: &[usize]) -> FeatureSchema {
    FeatureSchema::new(
        vocab_sizes
            .iter()
            .enumerate()
            .map(|(j, &k)| FeatureSpec {
                name: format!("f{j}"),
                kind: FeatureKind::Categorical {
                    vocabulary: (0..k).map(|v| format!("v{v}")).collect(),
                },
            })
            .collect(),
    )
    .expect("valid schema")
}

fn schema_and_instances() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>)> {
    // vocab sizes plus two instances over them
    prop::collection::vec(2usize..5, 2..6).prop_flat_map(|sizes| {
        let a = sizes
            .iter()
            .map(|&k| 0..k)
            .collect::<Vec<_>>()
            .prop_map(|v| v);
        let b = sizes
            .iter()
            .map(|&k| 0..k)
            .collect::<Vec<_>>()
            .prop_map(|v| v);
        (Just(sizes), a, b)
    })
}

proptest! {
    /// Distinct instances encode to distinct vectors.
    #[test]
    fn encode_is_injective((sizes, a, b) in schema_and_instances()) {
        let schema = categorical_schema(&sizes);
        let ra = schema.encode(&Instance::new(a.clone())).unwrap();
        let rb = schema.encode(&Instance::new(b.clone())).unwrap();
        if a != b {
            prop_assert_ne!(ra.values, rb.values);
        } else {
            prop_assert_eq!(ra.values, rb.values);
        }
    }

    /// Changing exactly k categorical values moves the representation by
    /// exactly sqrt(2k).
    #[test]
    fn k_edits_cost_sqrt_2k((sizes, a, b) in schema_and_instances()) {
        let schema = categorical_schema(&sizes);
        let k = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        let ra = schema.encode(&Instance::new(a)).unwrap();
        let rb = schema.encode(&Instance::new(b)).unwrap();
        let d = distance(&ra, &rb, DistanceMetric::Euclidean).unwrap();
        prop_assert!((d - (2.0 * k as f64).sqrt()).abs() < 1e-12);
    }

    /// Probabilities always pair to one and stay strictly inside (0, 1) for
    /// finite logits.
    #[test]
    fn prediction_probabilities_are_a_distribution(
        (weights, x) in (1usize..8).prop_flat_map(|n| (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-3.0f64..3.0, n),
        )),
        bias in -5.0f64..5.0,
    ) {
        let model = LogisticModel::new(weights, bias).unwrap();
        let spans = (0..x.len())
            .map(|i| cfeval::dataset::Span { start: i, len: 1 })
            .collect();
        let logit: f64 = rep_dot(&x, model.weights()) + bias;
        let rep = cfeval::dataset::Representation { values: x, spans };
        let p = model.predict(&rep).unwrap();
        prop_assert!((p.probs[0] + p.probs[1] - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&p.probs[1]));
        if logit.abs() < 30.0 {
            // strictly interior until the sigmoid saturates in f64
            prop_assert!(p.probs[1] > 0.0 && p.probs[1] < 1.0);
        }
        prop_assert_eq!(p.label, u8::from(p.probs[1] > p.probs[0]));
    }

    /// The analytic model gradient agrees with central finite differences.
    #[test]
    fn gradient_matches_finite_differences(
        (weights, x) in (2usize..6).prop_flat_map(|n| (
            prop::collection::vec(-3.0f64..3.0, n),
            prop::collection::vec(-2.0f64..2.0, n),
        )),
        bias in -2.0f64..2.0,
        target in 0u8..2,
    ) {
        let model = LogisticModel::new(weights, bias).unwrap();
        let spans: Vec<_> = (0..x.len())
            .map(|i| cfeval::dataset::Span { start: i, len: 1 })
            .collect();
        let rep = cfeval::dataset::Representation { values: x.clone(), spans: spans.clone() };
        let grad = model.gradient(&rep, target).unwrap();
        for i in 0..x.len() {
            let h = 1e-5;
            let mut plus = x.clone();
            plus[i] += h;
            let mut minus = x.clone();
            minus[i] -= h;
            let f = |v: Vec<f64>| {
                let r = cfeval::dataset::Representation { values: v, spans: spans.clone() };
                model.predict(&r).unwrap().probs[target as usize]
            };
            let fd = (f(plus) - f(minus)) / (2.0 * h);
            prop_assert!((grad[i] - fd).abs() / fd.abs().max(1e-8) <= 1e-4);
        }
    }

    /// Library statistics equal independently written definitional oracles,
    /// ties included.
    #[test]
    fn rank_statistics_match_signum_oracles(
        (u, v) in (2usize..8).prop_flat_map(|n| (
            prop::collection::vec(-3i8..4, n),
            prop::collection::vec(-3i8..4, n),
        )),
    ) {
        let uf: Vec<f64> = u.iter().map(|&x| f64::from(x)).collect();
        let vf: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
        let n = uf.len();

        // sign with a true zero for ties (f64::signum maps 0.0 to 1.0)
        let sign = |d: f64| {
            if d > 0.0 { 1.0 } else if d < 0.0 { -1.0 } else { 0.0 }
        };
        let mut signum_sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                signum_sum += sign(uf[i] - uf[j]) * sign(vf[i] - vf[j]);
            }
        }
        let oracle_tau = signum_sum / (n * (n - 1) / 2) as f64;
        prop_assert_eq!(kendall_tau(&uf, &vf).unwrap(), oracle_tau);

        let tau = kendall_tau(&uf, &vf).unwrap();
        let rho = spearman_rho(&uf, &vf).unwrap();
        prop_assert!((-1.0..=1.0).contains(&tau));
        prop_assert!((-1.0..=1.0 + 1e-12).contains(&rho));
    }

    /// Discrete search only ever touches explained features, and the flip
    /// flag always matches the label pair.
    #[test]
    fn discrete_search_edits_stay_inside_the_explanation(
        (sizes, values, _) in schema_and_instances(),
        weights_seed in 0u64..500,
        pick in prop::collection::vec(0usize..5, 1..3),
    ) {
        let schema = categorical_schema(&sizes);
        let m = schema.feature_count();
        let mut chosen: Vec<usize> = pick.iter().map(|p| p % m).collect();
        chosen.sort_unstable();
        chosen.dedup();
        let instance = Instance::new(values);
        let explanation = Explanation::new(chosen.clone(), m).unwrap();
        // seeded model over this schema
        let mut rng = cfeval::seed::rng_for(weights_seed, "prop-model", 0);
        use rand::Rng;
        let weights: Vec<f64> = (0..schema.width()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let model = LogisticModel::new(weights, 0.0).unwrap();
        let r = discrete_search(&model, &schema, &instance, &explanation, false, weights_seed)
            .unwrap();
        prop_assert!(r.edited.keys().all(|j| chosen.contains(j)));
        prop_assert_eq!(r.flipped, r.label != r.original_label);
        prop_assert!(r.distance >= 0.0);
        if r.edited.is_empty() {
            prop_assert!(r.distance == 0.0);
        } else {
            prop_assert!(r.distance > 0.0);
        }
    }
}
