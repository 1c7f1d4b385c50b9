//! Maximum consecutive cost steps (MCC) and its expectation over training
//! parts (EMCC).
//!
//! The pipeline for one training part and risk level:
//!
//! 1. pick the rollouts whose cumulative step index falls in the part;
//! 2. for every trajectory, take the longest run of cost steps divided by the
//!    trajectory length;
//! 3. the rollout's MCC is the maximum of those ratios;
//! 4. keep the `max(1, ⌈α·n⌉)` largest MCC values;
//! 5. average them.

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Slack for `⌈α·n⌉` so that e.g. `0.1 * 30 = 3.0000000000000004` selects 3.
const TAIL_EPS: f64 = 1e-9;

/// Default number of training parts.
pub const TRAINING_PARTS: usize = 3;

/// Per-step costs of one trajectory. Never empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeCosts {
    costs: Vec<f64>,
}

impl EpisodeCosts {
    pub fn new(costs: Vec<f64>) -> Result<Self, MetricsError> {
        if costs.is_empty() {
            return Err(MetricsError::EmptyEpisode);
        }
        Ok(Self { costs })
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.costs.iter().sum()
    }

    /// `d_max / l` for this trajectory.
    pub fn normalized_max_run(&self) -> f64 {
        max_consecutive_cost_steps(&self.costs) as f64 / self.costs.len() as f64
    }
}

/// The episodes collected under one policy snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutGroup {
    pub rollout_id: u64,
    pub episodes: Vec<EpisodeCosts>,
    /// Total environment steps completed at the end of this rollout.
    pub cumulative_step_index: u64,
}

impl RolloutGroup {
    pub fn steps(&self) -> u64 {
        self.episodes.iter().map(|e| e.len() as u64).sum()
    }
}

/// Build a stream from per-rollout episodes, filling in cumulative indices.
pub fn stream_from_episodes(rollouts: Vec<Vec<EpisodeCosts>>) -> Vec<RolloutGroup> {
    let mut cumulative = 0;
    rollouts
        .into_iter()
        .enumerate()
        .map(|(i, episodes)| {
            cumulative += episodes.iter().map(|e| e.len() as u64).sum::<u64>();
            RolloutGroup {
                rollout_id: i as u64,
                episodes,
                cumulative_step_index: cumulative,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MccSample {
    pub value: f64,
    pub cumulative_step_index: u64,
}

/// Length of the longest run of steps with strictly positive cost.
pub fn max_consecutive_cost_steps(costs: &[f64]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for &c in costs {
        if c > 0.0 {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

pub fn mcc_of_rollout(rollout: &RolloutGroup) -> Result<MccSample, MetricsError> {
    if rollout.episodes.is_empty() {
        return Err(MetricsError::EmptyRollout(rollout.rollout_id));
    }
    let value = rollout
        .episodes
        .iter()
        .map(EpisodeCosts::normalized_max_run)
        .fold(0.0, f64::max);
    Ok(MccSample {
        value,
        cumulative_step_index: rollout.cumulative_step_index,
    })
}

/// 1-based training part of a rollout ending at `cumulative` out of `total`
/// steps: the smallest `k` with `cumulative / total <= k / parts`.
pub fn part_of(cumulative: u64, total: u64, parts: usize) -> usize {
    if total == 0 {
        return 1;
    }
    let scaled = cumulative as u128 * parts as u128;
    (1..=parts)
        .find(|&k| scaled <= k as u128 * total as u128)
        .unwrap_or(parts)
}

/// Split a training stream into `parts` groups by cumulative environment-step
/// fraction. The total is the largest cumulative index in the stream.
pub fn partition_by_beta(stream: &[RolloutGroup], parts: usize) -> Vec<Vec<&RolloutGroup>> {
    let parts = parts.max(1);
    let total = stream
        .iter()
        .map(|r| r.cumulative_step_index)
        .max()
        .unwrap_or(0);
    let mut out = vec![Vec::new(); parts];
    for rollout in stream {
        out[part_of(rollout.cumulative_step_index, total, parts) - 1].push(rollout);
    }
    out
}

/// Number of values kept in the upper tail: `max(1, ⌈α·n⌉)`, capped at `n`.
pub fn tail_count(alpha: f64, n: usize) -> usize {
    let k = (alpha * n as f64 - TAIL_EPS).ceil();
    (k.max(1.0) as usize).min(n)
}

/// Mean of the `tail_count(alpha, n)` largest values.
pub fn upper_tail_mean(values: &[f64], alpha: f64) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyValues);
    }
    check_alpha(alpha, true)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = tail_count(alpha, sorted.len());
    Ok(sorted[..k].iter().sum::<f64>() / k as f64)
}

pub(crate) fn check_alpha(alpha: f64, allow_one: bool) -> Result<(), MetricsError> {
    let ok = alpha > 0.0 && (alpha < 1.0 || (allow_one && alpha == 1.0));
    if ok {
        Ok(())
    } else {
        Err(MetricsError::InvalidAlpha(alpha))
    }
}

/// EMCC restricted to one training part (1-based) and risk level `alpha`.
///
/// `Ok(None)` when the part holds no rollouts.
pub fn emcc_beta_alpha(
    stream: &[RolloutGroup],
    part: usize,
    alpha: f64,
) -> Result<Option<f64>, MetricsError> {
    emcc_for_parts(stream, part, TRAINING_PARTS, alpha)
}

pub fn emcc_for_parts(
    stream: &[RolloutGroup],
    part: usize,
    parts: usize,
    alpha: f64,
) -> Result<Option<f64>, MetricsError> {
    if part == 0 || part > parts {
        return Err(MetricsError::InvalidPart { part, parts });
    }
    check_alpha(alpha, true)?;
    let groups = partition_by_beta(stream, parts);
    let selected = &groups[part - 1];
    if selected.is_empty() {
        return Ok(None);
    }
    let values = selected
        .iter()
        .map(|r| mcc_of_rollout(r).map(|s| s.value))
        .collect::<Result<Vec<_>, _>>()?;
    upper_tail_mean(&values, alpha).map(Some)
}

/// Plain EMCC over the whole stream.
pub fn emcc(stream: &[RolloutGroup]) -> Result<Option<f64>, MetricsError> {
    emcc_for_parts(stream, 1, 1, 1.0)
}

/// Total cost divided by total environment steps.
pub fn cost_rate(stream: &[RolloutGroup]) -> Result<f64, MetricsError> {
    let mut cost = 0.0;
    let mut steps = 0u64;
    for episode in stream.iter().flat_map(|r| &r.episodes) {
        cost += episode.total();
        steps += episode.len() as u64;
    }
    if steps == 0 {
        return Err(MetricsError::ZeroSteps);
    }
    Ok(cost / steps as f64)
}
