use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cem::{cem_plan, CemParams};
use super::policies::Policy;
use super::AgentError;
use crate::circle2d::{Action, Circle2D, Observation};
use crate::metrics::EpisodeOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangianState {
    pub lambda: f64,
    /// Most recent observed mean episodic cost.
    pub jc_estimate: f64,
}

impl LagrangianState {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda: lambda.max(0.0),
            jc_estimate: 0.0,
        }
    }
}

/// Projected dual ascent: `λ' = max(0, λ + lr (J_C − limit))`.
pub fn update_lambda(
    state: LagrangianState,
    observed_jc: f64,
    cost_limit: f64,
    lr: f64,
) -> LagrangianState {
    LagrangianState {
        lambda: (state.lambda + lr * (observed_jc - cost_limit)).max(0.0),
        jc_estimate: observed_jc,
    }
}

/// Receding-horizon CEM on the true model with a cost penalty weighted by a
/// dual-ascent multiplier that is updated after every rollout.
#[derive(Debug, Clone)]
pub struct CemLagrangian {
    params: CemParams,
    state: LagrangianState,
    cost_limit: f64,
    lambda_lr: f64,
    rng: ChaCha8Rng,
    warm: Vec<Action>,
}

impl CemLagrangian {
    pub fn new(
        params: CemParams,
        lambda_init: f64,
        lambda_lr: f64,
        cost_limit: f64,
        seed: u64,
    ) -> Result<Self, AgentError> {
        params.elite_count()?;
        if !(lambda_lr > 0.0) {
            return Err(AgentError::Config(format!("lambda_lr must be positive, got {lambda_lr}")));
        }
        if !(cost_limit > 0.0) {
            return Err(AgentError::Config(format!("cost_limit must be positive, got {cost_limit}")));
        }
        Ok(Self {
            params,
            state: LagrangianState::new(lambda_init),
            cost_limit,
            lambda_lr,
            rng: ChaCha8Rng::seed_from_u64(seed),
            warm: Vec::new(),
        })
    }

    pub fn state(&self) -> LagrangianState {
        self.state
    }
}

impl Policy for CemLagrangian {
    fn act(&mut self, observation: Observation, env: &Circle2D) -> Action {
        let start = env.position_of(observation);
        let warm: Vec<Action> = self.warm.iter().skip(1).copied().collect();
        let plan = cem_plan(
            env.config(),
            env.geometry(),
            start,
            &self.params,
            self.state.lambda,
            Some(&warm),
            &mut self.rng,
        )
        .expect("parameters validated at construction");
        let first = plan.actions[0];
        self.warm = plan.actions;
        first
    }

    fn begin_episode(&mut self) {
        self.warm.clear();
    }

    fn end_rollout(&mut self, episodes: &[EpisodeOutcome]) {
        if episodes.is_empty() {
            return;
        }
        let jc = episodes.iter().map(EpisodeOutcome::cost_sum).sum::<f64>() / episodes.len() as f64;
        self.state = update_lambda(self.state, jc, self.cost_limit, self.lambda_lr);
    }

    fn lambda(&self) -> Option<f64> {
        Some(self.state.lambda)
    }
}
