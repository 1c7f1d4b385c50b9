use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::cem::CemParams;
use super::lagrangian::CemLagrangian;
use super::policies::{BoundaryWalker, GreedyThrough, Policy, RandomPolicy};
use super::AgentError;
use crate::circle2d::{clamp_action, Circle2D, EnvConfig};
use crate::metrics::EpisodeOutcome;
use crate::rollout_log::{write_episode, EpisodeHeader, StepRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Random,
    GreedyThrough,
    BoundaryWalker,
    CemLagrangian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub horizon: usize,
    pub iterations: usize,
    pub population: usize,
    pub elite_fraction: f64,
    pub lambda_init: f64,
    pub lambda_lr: f64,
    pub cost_limit: f64,
}

impl Default for PolicySpec {
    fn default() -> Self {
        let cem = CemParams::default();
        Self {
            kind: PolicyKind::BoundaryWalker,
            horizon: cem.horizon,
            iterations: cem.iterations,
            population: cem.population,
            elite_fraction: cem.elite_fraction,
            lambda_init: 1.0,
            lambda_lr: 0.05,
            cost_limit: 5.0,
        }
    }
}

impl PolicySpec {
    pub fn of(kind: PolicyKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if !(self.cost_limit > 0.0) {
            return Err(AgentError::Config(format!(
                "cost_limit must be positive, got {}",
                self.cost_limit
            )));
        }
        if self.kind == PolicyKind::CemLagrangian {
            self.cem_params().elite_count()?;
            if !(self.lambda_lr > 0.0) || !(self.lambda_init >= 0.0) {
                return Err(AgentError::Config(
                    "lambda_lr must be positive and lambda_init nonnegative".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn cem_params(&self) -> CemParams {
        CemParams {
            horizon: self.horizon,
            iterations: self.iterations,
            population: self.population,
            elite_fraction: self.elite_fraction,
            ..CemParams::default()
        }
    }

    pub fn build(&self, seed: u64) -> Result<Box<dyn Policy>, AgentError> {
        self.validate()?;
        Ok(match self.kind {
            PolicyKind::Random => Box::new(RandomPolicy::new(seed)),
            PolicyKind::GreedyThrough => Box::new(GreedyThrough),
            PolicyKind::BoundaryWalker => Box::new(BoundaryWalker),
            PolicyKind::CemLagrangian => Box::new(CemLagrangian::new(
                self.cem_params(),
                self.lambda_init,
                self.lambda_lr,
                self.cost_limit,
                seed,
            )?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    pub total_steps: u64,
    pub episodes_per_rollout: u64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            total_steps: 10_000,
            episodes_per_rollout: 1,
        }
    }
}

/// Configuration document for `run`: flat environment keys plus optional
/// `policy` and `experiment` objects.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub policy: PolicySpec,
    pub experiment: ExperimentSettings,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, AgentError> {
        let bad = |e: serde_json::Error| AgentError::Config(e.to_string());
        let value: Value = serde_json::from_str(text).map_err(bad)?;
        let Value::Object(mut map) = value else {
            return Err(AgentError::Config("configuration must be a JSON object".into()));
        };
        let policy = match map.remove("policy") {
            Some(v) => serde_json::from_value(v).map_err(bad)?,
            None => PolicySpec::default(),
        };
        let experiment = match map.remove("experiment") {
            Some(v) => serde_json::from_value(v).map_err(bad)?,
            None => ExperimentSettings::default(),
        };
        let env: EnvConfig = serde_json::from_value(Value::Object(map)).map_err(bad)?;
        env.validate()?;
        policy.validate()?;
        Ok(Self {
            env,
            policy,
            experiment,
        })
    }

    pub fn to_json(&self) -> Value {
        let mut map = match serde_json::to_value(&self.env).expect("serializable") {
            Value::Object(m) => m,
            _ => unreachable!(),
        };
        map.insert("policy".into(), serde_json::to_value(&self.policy).expect("serializable"));
        map.insert(
            "experiment".into(),
            serde_json::to_value(&self.experiment).expect("serializable"),
        );
        Value::Object(map)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub rollouts: u64,
    pub episodes: u64,
    pub steps: u64,
    /// Multiplier after each rollout, for policies that keep one.
    pub lambdas: Vec<f64>,
}

/// Collect rollouts until `total_steps` transitions are logged, updating the
/// policy between rollouts. An episode cut short by the step budget is
/// logged with `truncated` set on its last record.
pub fn run_experiment<W: Write>(
    env_config: &EnvConfig,
    policy_spec: &PolicySpec,
    episodes_per_rollout: u64,
    total_steps: u64,
    seed: u64,
    sink: &mut W,
) -> Result<ExperimentSummary, AgentError> {
    if total_steps < 1 {
        return Err(AgentError::Config("total_steps must be at least 1".into()));
    }
    if episodes_per_rollout < 1 {
        return Err(AgentError::Config("episodes_per_rollout must be at least 1".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut env = Circle2D::new(env_config.clone())?;
    let mut policy = policy_spec.build(master.next_u64())?;
    let digest = env_config.digest();

    let mut summary = ExperimentSummary {
        rollouts: 0,
        episodes: 0,
        steps: 0,
        lambdas: Vec::new(),
    };
    while summary.steps < total_steps {
        let mut outcomes = Vec::with_capacity(episodes_per_rollout as usize);
        for _ in 0..episodes_per_rollout {
            if summary.steps >= total_steps {
                break;
            }
            let episode_seed = master.next_u64();
            let mut observation = env.reset(Some(episode_seed));
            policy.begin_episode();
            let mut steps = Vec::new();
            loop {
                let action = policy.act(observation, &env);
                let result = env.step(action)?;
                summary.steps += 1;
                let out_of_budget = summary.steps >= total_steps;
                steps.push(StepRecord {
                    t: steps.len() as u64,
                    observation: result.observation.to_vec(),
                    action: clamp_action(action).to_vec(),
                    reward: result.reward,
                    cost: result.cost,
                    terminated: result.terminated,
                    truncated: result.truncated || (out_of_budget && !result.terminated),
                });
                observation = result.observation;
                if result.terminated || result.truncated || out_of_budget {
                    break;
                }
            }
            let header = EpisodeHeader {
                episode_id: summary.episodes,
                rollout_id: summary.rollouts,
                seed: episode_seed,
                env_config_digest: digest.clone(),
                length: steps.len() as u64,
            };
            write_episode(sink, &header, &steps)?;
            outcomes.push(EpisodeOutcome {
                rewards: steps.iter().map(|s| s.reward).collect(),
                costs: steps.iter().map(|s| s.cost).collect(),
            });
            summary.episodes += 1;
        }
        policy.end_rollout(&outcomes);
        if let Some(lambda) = policy.lambda() {
            summary.lambdas.push(lambda);
        }
        summary.rollouts += 1;
    }
    Ok(summary)
}
