use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::LogError;
use crate::metrics::{EpisodeCosts, EpisodeOutcome, RolloutGroup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeHeader {
    pub episode_id: u64,
    pub rollout_id: u64,
    pub seed: u64,
    pub env_config_digest: String,
    pub length: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub t: u64,
    pub observation: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub cost: f64,
    pub terminated: bool,
    pub truncated: bool,
}

impl StepRecord {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Episode(EpisodeHeader),
    Step(StepRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedEpisode {
    pub header: EpisodeHeader,
    pub steps: Vec<StepRecord>,
}

impl LoggedEpisode {
    pub fn costs(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.cost).collect()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    pub fn outcome(&self) -> EpisodeOutcome {
        EpisodeOutcome {
            rewards: self.rewards(),
            costs: self.costs(),
        }
    }
}

pub fn validate_episode(header: &EpisodeHeader, steps: &[StepRecord]) -> Result<(), LogError> {
    let fail = |msg: String| {
        Err(LogError::Validation {
            episode_id: Some(header.episode_id),
            msg,
        })
    };
    if header.length == 0 {
        return fail("episode has no steps".into());
    }
    if header.length != steps.len() as u64 {
        return fail(format!(
            "header length {} but {} steps",
            header.length,
            steps.len()
        ));
    }
    for (i, step) in steps.iter().enumerate() {
        if step.t != i as u64 {
            return fail(format!("step {i} has t = {}", step.t));
        }
        if step.done() && i + 1 != steps.len() {
            return fail(format!("step {i} ends the episode before its final record"));
        }
        let finite = step.reward.is_finite()
            && step.cost.is_finite()
            && step.observation.iter().all(|v| v.is_finite())
            && step.action.iter().all(|v| v.is_finite());
        if !finite {
            return fail(format!("step {i} has a non-finite value"));
        }
    }
    Ok(())
}

/// Append one episode: a header line, then one line per step, then flush.
/// Invalid input leaves the sink untouched.
pub fn write_episode<W: Write>(
    sink: &mut W,
    header: &EpisodeHeader,
    steps: &[StepRecord],
) -> Result<(), LogError> {
    validate_episode(header, steps)?;
    let mut buf = serde_json::to_vec(&Line::Episode(header.clone()))?;
    buf.push(b'\n');
    for step in steps {
        serde_json::to_writer(&mut buf, &Line::Step(step.clone()))?;
        buf.push(b'\n');
    }
    sink.write_all(&buf)?;
    sink.flush()?;
    Ok(())
}

/// Read and validate every episode in file order. Blank lines are ignored.
pub fn read_log<R: BufRead>(source: R) -> Result<Vec<LoggedEpisode>, LogError> {
    let mut episodes = Vec::new();
    let mut current: Option<LoggedEpisode> = None;

    let finish = |episode: LoggedEpisode, out: &mut Vec<LoggedEpisode>| {
        validate_episode(&episode.header, &episode.steps)?;
        out.push(episode);
        Ok::<_, LogError>(())
    };

    for (index, line) in source.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|e| LogError::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        match parsed {
            Line::Episode(header) => {
                if let Some(done) = current.take() {
                    finish(done, &mut episodes)?;
                }
                current = Some(LoggedEpisode {
                    header,
                    steps: Vec::new(),
                });
            }
            Line::Step(step) => match current.as_mut() {
                Some(episode) => {
                    if episode.steps.len() as u64 >= episode.header.length {
                        return Err(LogError::Validation {
                            episode_id: Some(episode.header.episode_id),
                            msg: format!("line {line_no}: more steps than the header declares"),
                        });
                    }
                    episode.steps.push(step);
                }
                None => {
                    return Err(LogError::Parse {
                        line: line_no,
                        msg: "step record before any episode header".into(),
                    })
                }
            },
        }
    }
    if let Some(done) = current.take() {
        finish(done, &mut episodes)?;
    }
    Ok(episodes)
}

/// Group consecutive episodes sharing a rollout id. Cumulative step indices
/// are the running sum of episode lengths.
pub fn group_rollouts(episodes: &[LoggedEpisode]) -> Result<Vec<RolloutGroup>, LogError> {
    let mut groups: Vec<RolloutGroup> = Vec::new();
    let mut cumulative = 0u64;
    for episode in episodes {
        let costs = EpisodeCosts::new(episode.costs()).map_err(|e| LogError::Validation {
            episode_id: Some(episode.header.episode_id),
            msg: e.to_string(),
        })?;
        cumulative += costs.len() as u64;
        let rollout_id = episode.header.rollout_id;
        match groups.last_mut() {
            Some(last) if last.rollout_id == rollout_id => {
                last.episodes.push(costs);
                last.cumulative_step_index = cumulative;
            }
            Some(last) if last.rollout_id > rollout_id => {
                return Err(LogError::Validation {
                    episode_id: Some(episode.header.episode_id),
                    msg: format!(
                        "rollout id {rollout_id} follows {}; ids must increase",
                        last.rollout_id
                    ),
                })
            }
            _ => groups.push(RolloutGroup {
                rollout_id,
                episodes: vec![costs],
                cumulative_step_index: cumulative,
            }),
        }
    }
    Ok(groups)
}
