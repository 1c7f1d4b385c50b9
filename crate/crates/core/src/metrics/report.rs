use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{cost_rate, cvar_alpha, emcc_for_parts, MetricsError, RolloutGroup, TRAINING_PARTS};
use crate::circle2d::episode_return;

/// Rewards and costs of one finished episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub rewards: Vec<f64>,
    pub costs: Vec<f64>,
}

impl EpisodeOutcome {
    pub fn cost_sum(&self) -> f64 {
        self.costs.iter().sum()
    }

    pub fn reward_sum(&self) -> f64 {
        self.rewards.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    /// J_R: mean discounted episode return.
    pub avg_return: f64,
    /// J_C: mean undiscounted episodic cost sum.
    pub avg_cost_return: f64,
    /// `(α, CVaR_α)` of the episodic cost-sum distribution.
    pub cvar_cost_return: Vec<(f64, f64)>,
    pub episode_length_mean: f64,
    /// `J_C <= cost_limit`.
    pub feasible: bool,
}

pub fn evaluation_summary(
    episodes: &[EpisodeOutcome],
    gamma: f64,
    cost_limit: f64,
    alphas: &[f64],
) -> Result<EvaluationSummary, MetricsError> {
    if episodes.is_empty() {
        return Err(MetricsError::EmptyValues);
    }
    let n = episodes.len() as f64;
    let avg_return = episodes
        .iter()
        .map(|e| episode_return(&e.rewards, gamma))
        .sum::<f64>()
        / n;
    let cost_sums: Vec<f64> = episodes.iter().map(EpisodeOutcome::cost_sum).collect();
    let avg_cost_return = cost_sums.iter().sum::<f64>() / n;
    let cvar_cost_return = alphas
        .iter()
        .map(|&a| cvar_alpha(&cost_sums, a).map(|v| (a, v)))
        .collect::<Result<Vec<_>, _>>()?;
    let episode_length_mean = episodes.iter().map(|e| e.costs.len() as f64).sum::<f64>() / n;
    Ok(EvaluationSummary {
        avg_return,
        avg_cost_return,
        cvar_cost_return,
        episode_length_mean,
        feasible: avg_cost_return <= cost_limit,
    })
}

/// Display label of a training part: 0.33, 0.66 and 0.99 for three parts.
pub fn beta_label(part: usize, parts: usize) -> f64 {
    if parts == TRAINING_PARTS {
        [0.33, 0.66, 0.99][part - 1]
    } else {
        part as f64 / parts as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmccEntry {
    pub part: usize,
    pub beta: f64,
    pub alpha: f64,
    /// `None` when the training part has no rollouts.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub emcc_alphas: Vec<f64>,
    pub cvar_alphas: Vec<f64>,
    pub gamma: f64,
    pub cost_limit: f64,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self {
            emcc_alphas: vec![0.1],
            cvar_alphas: vec![0.5],
            gamma: 0.99,
            cost_limit: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub emcc: Vec<EmccEntry>,
    pub cost_rate: f64,
    pub evaluation: EvaluationSummary,
}

/// One row of the flat `metric,beta,alpha,value` table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub metric: String,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub value: Option<f64>,
}

impl MetricReport {
    /// Training-stream metrics over `stream`, evaluation metrics over
    /// `evaluation_episodes`.
    pub fn build(
        stream: &[RolloutGroup],
        evaluation_episodes: &[EpisodeOutcome],
        settings: &ReportSettings,
    ) -> Result<Self, MetricsError> {
        let mut emcc = Vec::new();
        for &alpha in &settings.emcc_alphas {
            for part in 1..=TRAINING_PARTS {
                emcc.push(EmccEntry {
                    part,
                    beta: beta_label(part, TRAINING_PARTS),
                    alpha,
                    value: emcc_for_parts(stream, part, TRAINING_PARTS, alpha)?,
                });
            }
        }
        Ok(Self {
            emcc,
            cost_rate: cost_rate(stream)?,
            evaluation: evaluation_summary(
                evaluation_episodes,
                settings.gamma,
                settings.cost_limit,
                &settings.cvar_alphas,
            )?,
        })
    }

    pub fn rows(&self) -> Vec<MetricRow> {
        let mut rows: Vec<MetricRow> = self
            .emcc
            .iter()
            .map(|e| MetricRow {
                metric: format!("EMCC^{{{}}}_{{{}}}", e.alpha, e.beta),
                beta: Some(e.beta),
                alpha: Some(e.alpha),
                value: e.value,
            })
            .collect();
        let plain = |metric: &str, value: f64| MetricRow {
            metric: metric.to_string(),
            beta: None,
            alpha: None,
            value: Some(value),
        };
        rows.push(plain("rho_c", self.cost_rate));
        rows.push(plain("J_R", self.evaluation.avg_return));
        rows.push(plain("J_C", self.evaluation.avg_cost_return));
        for &(alpha, value) in &self.evaluation.cvar_cost_return {
            rows.push(MetricRow {
                metric: format!("CVaR_{{{alpha}}}"),
                beta: None,
                alpha: Some(alpha),
                value: Some(value),
            });
        }
        rows.push(plain(
            "episode_length_mean",
            self.evaluation.episode_length_mean,
        ));
        rows
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows(), None)
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "absent".to_string(), |x| x.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Render rows as CSV. With `std`, a fifth column carries one standard
/// deviation per row.
pub fn rows_to_csv(rows: &[MetricRow], std: Option<&[Option<f64>]>) -> String {
    let mut out = String::from("metric,beta,alpha,value");
    if std.is_some() {
        out.push_str(",std");
    }
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        let _ = write!(
            out,
            "{},{},{},{}",
            row.metric,
            opt(row.beta),
            opt(row.alpha),
            cell(row.value)
        );
        if let Some(std) = std {
            let _ = write!(out, ",{}", cell(std[i]));
        }
        out.push('\n');
    }
    out
}

/// Mean and population standard deviation of per-seed rows. Rows are matched
/// by position; absent cells are skipped, and a row absent in every seed stays
/// absent.
pub fn aggregate_rows(per_seed: &[Vec<MetricRow>]) -> (Vec<MetricRow>, Vec<Option<f64>>) {
    let Some(first) = per_seed.first() else {
        return (Vec::new(), Vec::new());
    };
    let mut rows = Vec::with_capacity(first.len());
    let mut stds = Vec::with_capacity(first.len());
    for (i, template) in first.iter().enumerate() {
        let values: Vec<f64> = per_seed.iter().filter_map(|r| r[i].value).collect();
        let (mean, std) = match mean_std(&values) {
            Some((m, s)) => (Some(m), Some(s)),
            None => (None, None),
        };
        rows.push(MetricRow {
            value: mean,
            ..template.clone()
        });
        stds.push(std);
    }
    (rows, stds)
}

/// Two-pass mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}
