use std::fmt::Write as _;

use super::AnalysisError;
use crate::metrics::mean_std;
use crate::rollout_log::LoggedEpisode;

/// Per-rollout means of one log.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutPoint {
    pub rollout_id: u64,
    pub cumulative_steps: u64,
    /// Mean undiscounted episodic reward sum.
    pub return_mean: f64,
    /// Mean episodic cost sum.
    pub cost_return_mean: f64,
}

/// One row of the training-curve table, aggregated across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub rollout: usize,
    pub cumulative_steps: f64,
    pub return_mean: f64,
    pub return_std: f64,
    pub cost_return_mean: f64,
    pub cost_return_std: f64,
    pub seeds: usize,
}

pub fn rollout_points(episodes: &[LoggedEpisode]) -> Vec<RolloutPoint> {
    let mut points: Vec<(RolloutPoint, usize)> = Vec::new();
    let mut cumulative = 0;
    for episode in episodes {
        cumulative += episode.steps.len() as u64;
        let ret: f64 = episode.steps.iter().map(|s| s.reward).sum();
        let cost: f64 = episode.steps.iter().map(|s| s.cost).sum();
        match points.last_mut() {
            Some((p, n)) if p.rollout_id == episode.header.rollout_id => {
                p.cumulative_steps = cumulative;
                p.return_mean += ret;
                p.cost_return_mean += cost;
                *n += 1;
            }
            _ => points.push((
                RolloutPoint {
                    rollout_id: episode.header.rollout_id,
                    cumulative_steps: cumulative,
                    return_mean: ret,
                    cost_return_mean: cost,
                },
                1,
            )),
        }
    }
    points
        .into_iter()
        .map(|(mut p, n)| {
            p.return_mean /= n as f64;
            p.cost_return_mean /= n as f64;
            p
        })
        .collect()
}

/// Align seeds by rollout index and average. Rows extend to the longest
/// seed; later rows average only the seeds that reach them. All logs must
/// share one configuration digest.
pub fn curve_rows(per_seed: &[Vec<LoggedEpisode>]) -> Result<Vec<CurveRow>, AnalysisError> {
    let mut digest: Option<&str> = None;
    for episode in per_seed.iter().flatten() {
        let d = episode.header.env_config_digest.as_str();
        match digest {
            Some(first) if first != d => {
                return Err(AnalysisError::ConfigMismatch(first.to_string(), d.to_string()))
            }
            _ => digest = Some(d),
        }
    }
    if digest.is_none() {
        return Err(AnalysisError::Empty);
    }
    let seeds: Vec<Vec<RolloutPoint>> = per_seed.iter().map(|e| rollout_points(e)).collect();
    let longest = seeds.iter().map(Vec::len).max().unwrap_or(0);
    let mut rows = Vec::with_capacity(longest);
    for i in 0..longest {
        let present: Vec<&RolloutPoint> = seeds.iter().filter_map(|s| s.get(i)).collect();
        let column = |f: fn(&RolloutPoint) -> f64| {
            mean_std(&present.iter().map(|p| f(p)).collect::<Vec<_>>()).expect("nonempty")
        };
        let (steps, _) = column(|p| p.cumulative_steps as f64);
        let (return_mean, return_std) = column(|p| p.return_mean);
        let (cost_return_mean, cost_return_std) = column(|p| p.cost_return_mean);
        rows.push(CurveRow {
            rollout: i,
            cumulative_steps: steps,
            return_mean,
            return_std,
            cost_return_mean,
            cost_return_std,
            seeds: present.len(),
        });
    }
    Ok(rows)
}

pub fn curves_to_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(
        "rollout,cumulative_steps,return_mean,return_std,cost_return_mean,cost_return_std,seeds\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.rollout,
            r.cumulative_steps,
            r.return_mean,
            r.return_std,
            r.cost_return_mean,
            r.cost_return_std,
            r.seeds
        );
    }
    out
}
