use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EnvConfig, EnvError, Geometry, Position};

pub type Observation = [f64; 2];
pub type Action = [f64; 2];

/// Left edge of the initialization rectangle as a fraction of the disk radius.
pub const INIT_REGION_INNER_FRACTION: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub cost: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub position: Position,
}

/// Outcome of applying one action to a position under the environment's
/// dynamics, with no episode bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub position: Position,
    pub reward: f64,
    pub cost: f64,
    /// The move was reverted because the region is impenetrable.
    pub blocked: bool,
}

/// Reward at `p`: negative distance to the infeasible optimum, normalized by
/// the arena half-width. In sparse mode the reward is zero outside the
/// corridor and cutouts.
pub fn reward_at(config: &EnvConfig, geometry: &Geometry, p: Position) -> f64 {
    if config.sparse_reward && !geometry.in_slot(p) {
        return 0.0;
    }
    -p.distance(geometry.infeasible_optimum) / config.arena_half_width()
}

pub fn clamp_action(action: Action) -> Action {
    [action[0].clamp(-1.0, 1.0), action[1].clamp(-1.0, 1.0)]
}

/// Deterministic point-mass dynamics shared by the environment and planners.
///
/// Non-finite action components are treated as zero.
pub fn transition(
    config: &EnvConfig,
    geometry: &Geometry,
    position: Position,
    action: Action,
) -> Transition {
    let action = clamp_action(action.map(|a| if a.is_finite() { a } else { 0.0 }));
    let limit = config.arena_half_width();
    let proposed = Position::new(
        (position.x + config.step_size * action[0]).clamp(-limit, limit),
        (position.y + config.step_size * action[1]).clamp(-limit, limit),
    );
    if !config.penetrable() {
        if geometry.segment_hits_cost_region(position, proposed) {
            return Transition {
                position,
                reward: reward_at(config, geometry, position),
                cost: 1.0,
                blocked: true,
            };
        }
        return Transition {
            position: proposed,
            reward: reward_at(config, geometry, proposed),
            cost: 0.0,
            blocked: false,
        };
    }
    let cost = if geometry.in_cost_region(proposed) { 1.0 } else { 0.0 };
    Transition {
        position: proposed,
        reward: reward_at(config, geometry, proposed),
        cost,
        blocked: false,
    }
}

/// Discounted sum `Σ γ^t r_t`. Empty input yields zero.
pub fn episode_return(rewards: &[f64], discount: f64) -> f64 {
    let mut total = 0.0;
    let mut weight = 1.0;
    for &r in rewards {
        total += weight * r;
        weight *= discount;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Idle,
    Running,
    Finished,
}

/// One Circle2D environment instance.
#[derive(Debug, Clone)]
pub struct Circle2D {
    config: EnvConfig,
    geometry: Geometry,
    rng: ChaCha8Rng,
    position: Position,
    steps: u32,
    status: Status,
}

impl Circle2D {
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        let geometry = Geometry::build(&config)?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self {
            config,
            geometry,
            rng,
            position: Position::ORIGIN,
            steps: 0,
            status: Status::Idle,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn position(&self) -> Position {
        self.position
    }

    pub fn steps_taken(&self) -> u32 {
        self.steps
    }

    pub fn episode_active(&self) -> bool {
        self.status == Status::Running
    }

    pub fn observe(&self, p: Position) -> Observation {
        let scale = self.config.arena_half_width();
        [p.x / scale, p.y / scale]
    }

    /// Inverse of [`observe`](Self::observe).
    pub fn position_of(&self, observation: Observation) -> Position {
        let scale = self.config.arena_half_width();
        Position::new(observation[0] * scale, observation[1] * scale)
    }

    /// Start a new episode. A seed reseeds the environment's generator;
    /// without one the current stream continues.
    pub fn reset(&mut self, seed: Option<u64>) -> Observation {
        if let Some(seed) = seed {
            self.rng = ChaCha8Rng::seed_from_u64(seed);
        }
        let start = self.sample_start();
        self.start_at(start)
    }

    /// Start a new episode at a chosen position.
    pub fn reset_to(&mut self, position: Position) -> Result<Observation, EnvError> {
        if !position.is_finite() {
            return Err(EnvError::InvalidPosition(format!("{position:?}")));
        }
        Ok(self.start_at(position))
    }

    fn start_at(&mut self, position: Position) -> Observation {
        self.position = position;
        self.steps = 0;
        self.status = Status::Running;
        self.observe(position)
    }

    fn sample_start(&mut self) -> Position {
        let r = self.config.constraint_radius;
        let outer = self.config.arena_half_width();
        if self.config.allow_infeasible_init {
            return Position::new(
                self.rng.random_range(-outer..=outer),
                self.rng.random_range(-outer..=outer),
            );
        }
        let inner = (INIT_REGION_INNER_FRACTION * r).min(outer);
        let half_height = 0.5 * self.config.init_region_size * r;
        loop {
            let p = Position::new(
                self.rng.random_range(inner..=outer),
                self.rng.random_range(-half_height..=half_height),
            );
            if !self.geometry.in_cost_region(p) {
                return p;
            }
        }
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        if self.status != Status::Running {
            return Err(EnvError::EpisodeNotActive);
        }
        if !action.iter().all(|a| a.is_finite()) {
            return Err(EnvError::InvalidAction(format!("{action:?}")));
        }
        let outcome = transition(&self.config, &self.geometry, self.position, action);
        self.position = outcome.position;
        self.steps += 1;
        let terminated = self.config.reset_on_cost && outcome.cost > 0.0;
        let truncated = self.steps >= self.config.max_episode_steps;
        if terminated || truncated {
            self.status = Status::Finished;
        }
        Ok(StepResult {
            observation: self.observe(outcome.position),
            reward: outcome.reward,
            cost: outcome.cost,
            terminated,
            truncated,
            position: outcome.position,
        })
    }
}
