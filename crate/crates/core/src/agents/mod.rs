//! Baseline behaviors and the experiment runner that turns them into logs.

mod cem;
mod harness;
mod lagrangian;
mod policies;

pub use cem::{cem_plan, sample_sequence, score_plan, CemParams, Plan, PlanScore};
pub use harness::{
    run_experiment, ExperimentSettings, ExperimentSummary, PolicyKind, PolicySpec, RunConfig,
};
pub use lagrangian::{update_lambda, CemLagrangian, LagrangianState};
pub use policies::{step_toward, BoundaryWalker, GreedyThrough, Policy, RandomPolicy};

use thiserror::Error;

use crate::circle2d::EnvError;
use crate::rollout_log::LogError;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid policy configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Log(#[from] LogError),
}
