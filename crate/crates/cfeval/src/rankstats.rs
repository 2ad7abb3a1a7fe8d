//! Rankings over explainer scores and rank-correlation statistics.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

/// Per-method ranks, 1 = best; exact ties receive the average of their
/// positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub method_names: Vec<String>,
    pub ranks: Vec<f64>,
    pub direction: Direction,
}

impl Ranking {
    pub fn new(method_names: Vec<String>, values: &[f64], direction: Direction) -> Result<Self> {
        if method_names.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: method_names.len(),
                got: values.len(),
            });
        }
        Ok(Ranking {
            method_names,
            ranks: rank(values, direction)?,
            direction,
        })
    }
}

/// Rank values with 1 as best under the given direction; ties get average
/// ranks.
pub fn rank(values: &[f64], direction: Direction) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Config("rank needs at least one value".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("rank needs finite values".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    match direction {
        Direction::HigherBetter => {
            order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap())
        }
        Direction::LowerBetter => {
            order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        }
    }
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions are 1-based; tied entries share the average position
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    Ok(ranks)
}

fn check_pair(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    if u.len() < 2 {
        return Err(Error::Config(
            "rank correlation needs at least two entries".into(),
        ));
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(Error::Config("rank correlation needs finite values".into()));
    }
    Ok(())
}

/// Kendall's tau: concordant minus discordant pairs over `n(n-1)/2`. Pairs
/// tied in either list count in neither set.
pub fn kendall_tau(u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(u, v)?;
    let n = u.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let du = u[i] - u[j];
            let dv = v[i] - v[j];
            if du == 0.0 || dv == 0.0 {
                continue;
            }
            if (du > 0.0) == (dv > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let total = (n * (n - 1) / 2) as f64;
    Ok((concordant - discordant) as f64 / total)
}

/// Spearman's rho: replace both lists by ascending average ranks, then
/// `1 - 6 sum(d^2) / (n(n^2-1))`.
pub fn spearman_rho(u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(u, v)?;
    let a = ascending_ranks(u);
    let b = ascending_ranks(v);
    let n = u.len() as f64;
    let d2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(1.0 - 6.0 * d2 / (n * (n * n - 1.0)))
}

/// Smaller ranks to smaller values; ties get average ranks.
fn ascending_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}
