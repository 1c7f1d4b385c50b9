//! The Circle2D environment family (levels 0-3).

mod config;
mod env;
mod geometry;

pub use config::{EnvConfig, DEFAULT_STEP_SIZE};
pub use env::{
    clamp_action, episode_return, reward_at, transition, Action, Circle2D, Observation,
    StepResult, Transition, INIT_REGION_INNER_FRACTION,
};
pub use geometry::{
    Geometry, Position, RadialSlot, CORRIDOR_INNER_FRACTION, CUTOUT_INNER_FRACTION,
    SLOT_OUTER_FRACTION,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("invalid environment configuration: {0}")]
    InvalidConfig(String),
    #[error("no active episode; call reset first")]
    EpisodeNotActive,
    #[error("invalid action {0}")]
    InvalidAction(String),
    #[error("invalid position {0}")]
    InvalidPosition(String),
}
