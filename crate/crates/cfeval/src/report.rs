//! Assembles per-explainer scores into metric tables, rankings, and
//! rank-correlation summaries, and writes them out as JSON, markdown, and
//! CSV.

use crate::error::{io_err, Error, Result};
use crate::metrics::MethodScores;
use crate::rankstats::{kendall_tau, rank, spearman_rho, Direction};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const GROUND_TRUTH_ROW: &str = "ground_truth";

/// One metric across all explainers, with ranks when the metric is ranked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    /// `None` for auxiliary rows (proximity) that are never ranked.
    pub direction: Option<Direction>,
    pub values: Vec<f64>,
    pub ranks: Option<Vec<f64>>,
}

/// Agreement of one metric's ranking with the ground-truth ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub metric: String,
    pub tau: f64,
    pub rho: f64,
}

/// Scores of one explainer, one bundle per removal mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainerScores {
    pub name: String,
    pub per_mode: Vec<MethodScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset_id: String,
    /// Counterfactual search family used: "discrete" or "continuous".
    pub cf_mode: String,
    pub l: usize,
    pub explainers: Vec<String>,
    pub rows: Vec<MetricRow>,
    pub correlations: Vec<CorrelationRow>,
    /// Set when correlations cannot be computed (fewer than two explainers).
    pub correlations_note: Option<String>,
    pub scores: Vec<ExplainerScores>,
    /// Full resolved configuration; rerunning it reproduces this report.
    pub config_snapshot: serde_json::Value,
}

fn direction_of(metric: &str) -> Option<Direction> {
    if metric == "proximity" || metric == "proximity_soft" {
        return None; // auxiliary: feeds ces but is never ranked
    }
    if metric.starts_with("suff") {
        return Some(Direction::LowerBetter);
    }
    Some(Direction::HigherBetter)
}

/// Rank each metric per its direction and correlate every ranked metric's
/// ranking with the ground-truth ranking.
pub fn build_report(
    dataset_id: &str,
    cf_mode: &str,
    l: usize,
    scores: &[ExplainerScores],
    config_snapshot: serde_json::Value,
) -> Result<EvaluationReport> {
    if scores.is_empty() {
        return Err(Error::Config("report needs at least one explainer".into()));
    }
    let n_modes = scores[0].per_mode.len();
    if n_modes == 0 || scores.iter().any(|s| s.per_mode.len() != n_modes) {
        return Err(Error::Config(
            "every explainer needs scores for the same removal modes".into(),
        ));
    }
    let explainers: Vec<String> = scores.iter().map(|s| s.name.clone()).collect();

    let mut rows: Vec<MetricRow> = Vec::new();
    let mut push_row = |metric: String, values: Vec<f64>| -> Result<()> {
        let direction = direction_of(&metric);
        let ranks = match direction {
            Some(d) => Some(rank(&values, d)?),
            None => None,
        };
        rows.push(MetricRow {
            metric,
            direction,
            values,
            ranks,
        });
        Ok(())
    };

    for mode_idx in 0..n_modes {
        let tag = scores[0].per_mode[mode_idx].removal_mode.tag();
        let collect = |f: fn(&MethodScores) -> f64| -> Vec<f64> {
            scores.iter().map(|s| f(&s.per_mode[mode_idx])).collect()
        };
        push_row(format!("comp_{tag}"), collect(|m| m.comp))?;
        push_row(format!("suff_{tag}"), collect(|m| m.suff))?;
        push_row(format!("dfr_{tag}"), collect(|m| m.dfr))?;
    }
    // counterfactual metrics are removal-mode independent; take mode 0
    let collect = |f: fn(&MethodScores) -> f64| -> Vec<f64> {
        scores.iter().map(|s| f(&s.per_mode[0])).collect()
    };
    push_row("validity".into(), collect(|m| m.validity))?;
    push_row("proximity".into(), collect(|m| m.proximity))?;
    push_row("ces".into(), collect(|m| m.ces))?;
    push_row("validity_soft".into(), collect(|m| m.validity_soft))?;
    push_row("ces_soft".into(), collect(|m| m.ces_soft))?;
    push_row(GROUND_TRUTH_ROW.into(), collect(|m| m.ground_truth_fraction))?;

    let mut correlations = Vec::new();
    let mut correlations_note = None;
    if explainers.len() < 2 {
        correlations_note = Some(
            "rank correlations are undefined for fewer than two explainers".to_owned(),
        );
    } else {
        let gt_ranks = rows
            .iter()
            .find(|r| r.metric == GROUND_TRUTH_ROW)
            .and_then(|r| r.ranks.clone())
            .expect("ground truth row is always ranked");
        for row in &rows {
            if row.metric == GROUND_TRUTH_ROW {
                continue;
            }
            if let Some(ranks) = &row.ranks {
                correlations.push(CorrelationRow {
                    metric: row.metric.clone(),
                    tau: kendall_tau(ranks, &gt_ranks)?,
                    rho: spearman_rho(ranks, &gt_ranks)?,
                });
            }
        }
    }

    Ok(EvaluationReport {
        dataset_id: dataset_id.to_owned(),
        cf_mode: cf_mode.to_owned(),
        l,
        explainers,
        rows,
        correlations,
        correlations_note,
        scores: scores.to_vec(),
        config_snapshot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Json,
    Markdown,
    Csv,
}

/// Write one output format into `out_dir`; returns the created paths.
/// Markdown produces both the metric table and the correlation table.
pub fn emit(report: &EvaluationReport, format: EmitFormat, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    match format {
        EmitFormat::Json => {
            let path = out_dir.join("report.json");
            let body = serde_json::to_string_pretty(report)
                .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
            write_atomic(&path, &(body + "\n"))?;
            Ok(vec![path])
        }
        EmitFormat::Markdown => {
            let t1 = out_dir.join("table1.md");
            write_atomic(&t1, &render_metric_table(report))?;
            let t2 = out_dir.join("table2.md");
            write_atomic(&t2, &render_correlation_table(report))?;
            Ok(vec![t1, t2])
        }
        EmitFormat::Csv => {
            let path = out_dir.join("scores.csv");
            write_atomic(&path, &render_csv(report))?;
            Ok(vec![path])
        }
    }
}

/// Emit every format.
pub fn emit_all(report: &EvaluationReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = emit(report, EmitFormat::Json, out_dir)?;
    paths.extend(emit(report, EmitFormat::Markdown, out_dir)?);
    paths.extend(emit(report, EmitFormat::Csv, out_dir)?);
    Ok(paths)
}

/// Write-then-rename so an interrupted run never leaves a truncated file.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))?;
    Ok(())
}

fn ordinal(rank: f64) -> String {
    if rank.fract() != 0.0 {
        return format!("{rank}th");
    }
    let k = rank as i64;
    let suffix = match (k % 10, k % 100) {
        (1, 11) | (2, 12) | (3, 13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{k}{suffix}")
}

fn display_name(report: &EvaluationReport, metric: &str) -> String {
    let mode_tag = if report.cf_mode == "continuous" { "cont." } else { "disc." };
    match metric {
        "validity" => "Validity".into(),
        "proximity" => "Proximity".into(),
        "ces" => format!("C ({mode_tag})"),
        "validity_soft" => "Validity_soft".into(),
        "ces_soft" => format!("C_soft ({mode_tag})"),
        GROUND_TRUTH_ROW => "GroundTruth*".into(),
        other => {
            let pretty = other
                .replace("comp_", "Comp. (")
                .replace("suff_", "Suff. (")
                .replace("dfr_", "DFR (");
            if pretty.contains('(') {
                format!("{pretty})")
            } else {
                pretty
            }
        }
    }
}

fn render_metric_table(report: &EvaluationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# Evaluation: {} (L={}, {} counterfactuals)\n\n",
        report.dataset_id, report.l, report.cf_mode
    ));
    out.push_str(&format!("| Metric | {} |\n", report.explainers.join(" | ")));
    out.push_str(&format!("|---|{}\n", "---|".repeat(report.explainers.len())));
    for row in &report.rows {
        let arrow = match row.direction {
            Some(Direction::HigherBetter) => " ^",
            Some(Direction::LowerBetter) => " v",
            None => "",
        };
        let star = if row.metric == GROUND_TRUTH_ROW { "*" } else { "" };
        let cells: Vec<String> = row
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| match &row.ranks {
                Some(ranks) => format!("{v:.4} ({}{star})", ordinal(ranks[i])),
                None => format!("{v:.4}"),
            })
            .collect();
        out.push_str(&format!(
            "| {}{arrow} | {} |\n",
            display_name(report, &row.metric),
            cells.join(" | ")
        ));
    }
    out
}

fn render_correlation_table(report: &EvaluationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# Correlation with GroundTruth*: {}\n\n",
        report.dataset_id
    ));
    if let Some(note) = &report.correlations_note {
        out.push_str(&format!("{note}\n"));
        return out;
    }
    out.push_str("| Metric | tau | rho |\n|---|---|---|\n");
    for c in &report.correlations {
        out.push_str(&format!(
            "| {} | {:.4} | {:.4} |\n",
            display_name(report, &c.metric),
            c.tau,
            c.rho
        ));
    }
    out
}

fn render_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("metric,explainer,value,rank\n");
    for row in &report.rows {
        for (i, name) in report.explainers.iter().enumerate() {
            let rank_cell = row
                .ranks
                .as_ref()
                .map(|r| r[i].to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.metric, name, row.values[i], rank_cell
            ));
        }
    }
    out
}
