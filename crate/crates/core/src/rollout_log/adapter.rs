//! Normalizes step-per-line JSON logs from other frameworks into the native
//! episode layout.
//!
//! Each input line is a JSON object. Lines carrying `"type": "episode"` are
//! treated as native headers and supply episode metadata for the steps that
//! follow; every other line is a step whose fields are looked up through a
//! [`FieldMap`].

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{validate_episode, EpisodeHeader, LogError, LoggedEpisode, StepRecord};

/// Foreign key names for each native field. `reward`, `cost` and
/// `terminated` are required; the rest are optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMap {
    pub reward: String,
    pub cost: String,
    pub terminated: String,
    #[serde(default)]
    pub truncated: Option<String>,
    #[serde(default)]
    pub episode_id: Option<String>,
    #[serde(default)]
    pub rollout_id: Option<String>,
    #[serde(default)]
    pub observation: Option<String>,
    #[serde(default)]
    pub action: Option<String>,
}

impl FieldMap {
    /// The identity mapping for native logs.
    pub fn native() -> Self {
        Self {
            reward: "reward".into(),
            cost: "cost".into(),
            terminated: "terminated".into(),
            truncated: Some("truncated".into()),
            episode_id: None,
            rollout_id: None,
            observation: Some("observation".into()),
            action: Some("action".into()),
        }
    }

    fn check(&self) -> Result<(), LogError> {
        for (field, key) in [
            ("reward", &self.reward),
            ("cost", &self.cost),
            ("terminated", &self.terminated),
        ] {
            if key.is_empty() {
                return Err(LogError::Config(format!(
                    "required field `{field}` has no source key"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptOptions {
    /// Episodes per synthesized rollout when the source carries no rollout id.
    pub episodes_per_rollout: u64,
    pub env_config_digest: String,
    pub seed: u64,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        Self {
            episodes_per_rollout: 1,
            env_config_digest: "foreign".into(),
            seed: 0,
        }
    }
}

#[derive(Debug, Default)]
struct Pending {
    native: Option<EpisodeHeader>,
    key: Option<Value>,
    rollout: Option<u64>,
    steps: Vec<StepRecord>,
}

pub fn adapt_foreign_log<R: BufRead>(
    source: R,
    mapping: &FieldMap,
    options: &AdaptOptions,
) -> Result<Vec<LoggedEpisode>, LogError> {
    mapping.check()?;
    if options.episodes_per_rollout == 0 {
        return Err(LogError::Config("episodes_per_rollout must be at least 1".into()));
    }
    let mut out = Vec::new();
    let mut pending = Pending::default();

    for (index, line) in source.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| LogError::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        let Value::Object(obj) = value else {
            return Err(LogError::Parse {
                line: line_no,
                msg: "expected a JSON object".into(),
            });
        };

        if obj.get("type").and_then(Value::as_str) == Some("episode") {
            close(&mut pending, &mut out, options)?;
            let header: EpisodeHeader = serde_json::from_value(strip_type(obj)).map_err(|e| {
                LogError::Parse {
                    line: line_no,
                    msg: e.to_string(),
                }
            })?;
            pending.native = Some(header);
            continue;
        }

        if let Some(key) = &mapping.episode_id {
            let id = required(&obj, key, "episode_id", line_no)?.clone();
            if pending.key.as_ref().is_some_and(|k| *k != id) {
                close(&mut pending, &mut out, options)?;
            }
            pending.key = Some(id);
        }
        if let Some(key) = &mapping.rollout_id {
            let v = required(&obj, key, "rollout_id", line_no)?;
            let id = v.as_u64().ok_or_else(|| LogError::Parse {
                line: line_no,
                msg: format!("`{key}` is not a non-negative integer"),
            })?;
            pending.rollout = Some(id);
        }

        let reward = number(&obj, &mapping.reward, "reward", line_no)?;
        let cost = number(&obj, &mapping.cost, "cost", line_no)?;
        let terminated = flag(&obj, &mapping.terminated, "terminated", line_no)?;
        let truncated = match &mapping.truncated {
            Some(key) => flag(&obj, key, "truncated", line_no)?,
            None => false,
        };
        let observation = match &mapping.observation {
            Some(key) => vector(&obj, key, "observation", line_no)?,
            None => Vec::new(),
        };
        let action = match &mapping.action {
            Some(key) => vector(&obj, key, "action", line_no)?,
            None => Vec::new(),
        };
        pending.steps.push(StepRecord {
            t: pending.steps.len() as u64,
            observation,
            action,
            reward,
            cost,
            terminated,
            truncated,
        });
        if terminated || truncated {
            close(&mut pending, &mut out, options)?;
        }
    }
    close(&mut pending, &mut out, options)?;
    Ok(out)
}

fn strip_type(mut obj: Map<String, Value>) -> Value {
    obj.remove("type");
    Value::Object(obj)
}

fn close(
    pending: &mut Pending,
    out: &mut Vec<LoggedEpisode>,
    options: &AdaptOptions,
) -> Result<(), LogError> {
    if pending.steps.is_empty() {
        return Ok(());
    }
    let index = out.len() as u64;
    let steps = std::mem::take(&mut pending.steps);
    let header = match pending.native.take() {
        Some(native) => native,
        None => EpisodeHeader {
            episode_id: pending
                .key
                .as_ref()
                .and_then(Value::as_u64)
                .unwrap_or(index),
            rollout_id: pending
                .rollout
                .unwrap_or(index / options.episodes_per_rollout),
            seed: options.seed,
            env_config_digest: options.env_config_digest.clone(),
            length: steps.len() as u64,
        },
    };
    pending.key = None;
    pending.rollout = None;
    validate_episode(&header, &steps)?;
    out.push(LoggedEpisode { header, steps });
    Ok(())
}

fn required<'a>(
    obj: &'a Map<String, Value>,
    key: &str,
    field: &str,
    line: usize,
) -> Result<&'a Value, LogError> {
    obj.get(key).ok_or_else(|| {
        LogError::Config(format!(
            "line {line}: key `{key}` mapped to `{field}` is missing"
        ))
    })
}

fn number(obj: &Map<String, Value>, key: &str, field: &str, line: usize) -> Result<f64, LogError> {
    match required(obj, key, field, line)? {
        Value::Number(n) => n.as_f64().ok_or_else(|| LogError::Parse {
            line,
            msg: format!("`{key}` is not representable as f64"),
        }),
        Value::Bool(b) => Ok(f64::from(u8::from(*b))),
        _ => Err(LogError::Parse {
            line,
            msg: format!("`{key}` is not a number"),
        }),
    }
}

fn flag(obj: &Map<String, Value>, key: &str, field: &str, line: usize) -> Result<bool, LogError> {
    match required(obj, key, field, line)? {
        Value::Bool(b) => Ok(*b),
        Value::Number(n) => Ok(n.as_f64().is_some_and(|v| v != 0.0)),
        _ => Err(LogError::Parse {
            line,
            msg: format!("`{key}` is not a boolean"),
        }),
    }
}

fn vector(
    obj: &Map<String, Value>,
    key: &str,
    field: &str,
    line: usize,
) -> Result<Vec<f64>, LogError> {
    let bad = || LogError::Parse {
        line,
        msg: format!("`{key}` is not a numeric array"),
    };
    match required(obj, key, field, line)? {
        Value::Array(items) => items.iter().map(|v| v.as_f64().ok_or_else(bad)).collect(),
        Value::Number(n) => Ok(vec![n.as_f64().ok_or_else(bad)?]),
        _ => Err(bad()),
    }
}
