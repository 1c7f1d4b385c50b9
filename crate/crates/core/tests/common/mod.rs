#![allow(dead_code)]

use std::io::Cursor;

use rand::Rng;
use safebench::rollout_log::{read_log, write_episode, EpisodeHeader, LoggedEpisode, StepRecord};

/// A logged episode with the given per-step costs and rewards of zero.
pub fn synthetic_episode(episode_id: u64, rollout_id: u64, costs: &[f64]) -> LoggedEpisode {
    let n = costs.len();
    LoggedEpisode {
        header: EpisodeHeader {
            episode_id,
            rollout_id,
            seed: episode_id,
            env_config_digest: "synthetic".into(),
            length: n as u64,
        },
        steps: costs
            .iter()
            .enumerate()
            .map(|(t, &cost)| StepRecord {
                t: t as u64,
                observation: vec![0.0, 0.0],
                action: vec![0.0, 0.0],
                reward: -cost,
                cost,
                terminated: false,
                truncated: t + 1 == n,
            })
            .collect(),
    }
}

/// Rollouts of episodes of costs, as a flat list of logged episodes.
pub fn episodes_from_costs(rollouts: &[Vec<Vec<f64>>]) -> Vec<LoggedEpisode> {
    let mut out = Vec::new();
    for (r, rollout) in rollouts.iter().enumerate() {
        for costs in rollout {
            out.push(synthetic_episode(out.len() as u64, r as u64, costs));
        }
    }
    out
}

/// Serialize and parse back through the log format.
pub fn through_log(episodes: &[LoggedEpisode]) -> Vec<LoggedEpisode> {
    let mut buf = Vec::new();
    for e in episodes {
        write_episode(&mut buf, &e.header, &e.steps).unwrap();
    }
    read_log(Cursor::new(buf)).unwrap()
}

/// Random cost pattern of length `1..=max_len` mixing zero and unit costs
/// in runs.
pub fn random_costs<R: Rng>(rng: &mut R, max_len: usize) -> Vec<f64> {
    let len = rng.random_range(1..=max_len);
    let p_cost: f64 = rng.random_range(0.0..1.0);
    let mut costs = Vec::with_capacity(len);
    while costs.len() < len {
        let run = rng.random_range(1..=len);
        let value = if rng.random_bool(p_cost) { 1.0 } else { 0.0 };
        for _ in 0..run.min(len - costs.len()) {
            costs.push(value);
        }
    }
    costs
}

/// Training stream of `1..=max_rollouts` rollouts, each with
/// `1..=max_episodes` episodes of `1..=max_len` steps.
pub fn random_stream<R: Rng>(
    rng: &mut R,
    max_rollouts: usize,
    max_episodes: usize,
    max_len: usize,
) -> Vec<Vec<Vec<f64>>> {
    let rollouts = rng.random_range(1..=max_rollouts);
    (0..rollouts)
        .map(|_| {
            let episodes = rng.random_range(1..=max_episodes);
            (0..episodes).map(|_| random_costs(rng, max_len)).collect()
        })
        .collect()
}

/// Brute-force EMCC of one training part, written step by step from the
/// definition. `alpha` is the rational `num / den` so that `⌈α·n⌉` is exact.
pub fn emcc_oracle(rollouts: &[Vec<Vec<f64>>], part: usize, num: usize, den: usize) -> Option<f64> {
    // Step 1: assign each rollout to a third by the fraction of training
    // steps completed when it ends.
    let lengths: Vec<usize> = rollouts
        .iter()
        .map(|r| r.iter().map(Vec::len).sum())
        .collect();
    let total: usize = lengths.iter().sum();
    let mut done = 0;
    let mut members = Vec::new();
    for (rollout, len) in rollouts.iter().zip(&lengths) {
        done += len;
        let fraction = done as f64 / total as f64;
        let k = (1..=3).find(|&k| fraction <= k as f64 / 3.0).unwrap_or(3);
        if k == part {
            members.push(rollout);
        }
    }
    if members.is_empty() {
        return None;
    }
    // Steps 2 and 3: enumerate every run of cost steps, normalize the
    // longest by episode length, then take the maximum over the rollout.
    let mut mccs: Vec<f64> = members
        .iter()
        .map(|rollout| {
            let mut best = 0.0f64;
            for episode in rollout.iter() {
                let mut runs = Vec::new();
                let mut current = 0usize;
                for &c in episode {
                    if c > 0.0 {
                        current += 1;
                    } else if current > 0 {
                        runs.push(current);
                        current = 0;
                    }
                }
                if current > 0 {
                    runs.push(current);
                }
                let longest = runs.into_iter().max().unwrap_or(0);
                best = best.max(longest as f64 / episode.len() as f64);
            }
            best
        })
        .collect();
    // Step 4: keep the highest ⌈α·n⌉ values (at least one).
    mccs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let n = mccs.len();
    let k = ((num * n).div_ceil(den)).max(1);
    // Step 5: average them.
    let mut sum = 0.0;
    for v in &mccs[..k] {
        sum += v;
    }
    Some(sum / k as f64)
}
