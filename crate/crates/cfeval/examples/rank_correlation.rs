//! Kendall's tau and Spearman's rho on explainer rankings, reproducing the
//! published correlation numbers from the ranking columns alone.
//!
//! ```bash
//! cargo run --example rank_correlation
//! ```

use cfeval::rankstats::{kendall_tau, rank, spearman_rho, Direction};

fn main() {
    // explainer order: Random, Omission, LIME, Anchor, DecisionBoundary,
    // LogisticRegression; ranks use 1 = best
    let ground_truth = [6.0, 5.0, 2.0, 4.0, 3.0, 1.0];

    let columns: [(&str, [f64; 6]); 4] = [
        ("Comp. (del.)", [6.0, 5.0, 4.0, 3.0, 2.0, 1.0]),
        ("DFR", [5.0, 6.0, 4.0, 3.0, 1.0, 2.0]),
        ("Validity", [6.0, 5.0, 2.0, 4.0, 3.0, 1.0]),
        ("C (disc.)", [6.0, 5.0, 2.0, 4.0, 3.0, 1.0]),
    ];
    println!("agreement with the ground-truth ranking (tabular benchmark):");
    for (label, column) in columns {
        let tau = kendall_tau(&column, &ground_truth).expect("valid");
        let rho = spearman_rho(&column, &ground_truth).expect("valid");
        println!("  {label:<13} tau {tau:+.4}  rho {rho:+.4}");
    }

    // the same machinery ranks raw scores; ties get average ranks
    let scores = [0.31, 0.18, 0.31, 0.05];
    let ranks = rank(&scores, Direction::HigherBetter).expect("valid");
    println!("\nranking raw scores {scores:?} (higher is better): {ranks:?}");

    let tau = kendall_tau(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 4.0, 3.0]).expect("valid");
    println!("one swapped neighbor out of four: tau {tau:+.4}");
}
