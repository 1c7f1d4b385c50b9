use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circle2d::{transition, Action, Circle2D, Geometry, Observation, Position};
use crate::metrics::EpisodeOutcome;

/// Relative safety margin of the boundary walker: the disk is inflated by it
/// and the target is pulled this far into the corridor, so rounding never
/// lands a step on the wrong side of an edge.
const WALKER_MARGIN: f64 = 1e-6;
const WALKER_ANGLE_STEPS: u32 = 180;
/// Distances below this count as already at the target.
const ARRIVAL_EPS: f64 = 1e-12;

/// A behavior that maps observations to actions and may adapt between
/// rollouts.
pub trait Policy {
    fn act(&mut self, observation: Observation, env: &Circle2D) -> Action;

    fn begin_episode(&mut self) {}

    /// Called once per rollout with the episodes it produced.
    fn end_rollout(&mut self, _episodes: &[EpisodeOutcome]) {}

    /// Current Lagrange multiplier, for policies that keep one.
    fn lambda(&self) -> Option<f64> {
        None
    }
}

/// Action that moves toward `target` by at most one full step.
pub fn step_toward(from: Position, target: Position, step_size: f64) -> Action {
    let delta = target - from;
    let dist = delta.norm();
    if dist <= ARRIVAL_EPS {
        return [0.0, 0.0];
    }
    let scale = (dist / step_size).min(1.0) / dist;
    [delta.x * scale, delta.y * scale]
}

/// Uniform actions on `[-1, 1]²`.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _observation: Observation, _env: &Circle2D) -> Action {
        [
            self.rng.random_range(-1.0..=1.0),
            self.rng.random_range(-1.0..=1.0),
        ]
    }
}

/// Heads straight for the infeasible optimum, ignoring the cost region.
#[derive(Debug, Clone, Default)]
pub struct GreedyThrough;

impl Policy for GreedyThrough {
    fn act(&mut self, observation: Observation, env: &Circle2D) -> Action {
        let p = env.position_of(observation);
        step_toward(p, env.geometry().infeasible_optimum, env.config().step_size)
    }
}

/// Heads for the feasible optimum and turns along the cost-region boundary
/// whenever the direct step would touch it.
#[derive(Debug, Clone, Default)]
pub struct BoundaryWalker;

impl BoundaryWalker {
    fn rotate(v: Position, angle: f64) -> Position {
        let (s, c) = angle.sin_cos();
        Position::new(c * v.x - s * v.y, s * v.x + c * v.y)
    }

    /// Choose the next action from `p`. Returns a zero action when no
    /// direction is safe.
    pub fn plan(p: Position, env: &Circle2D) -> Action {
        let config = env.config();
        let geometry = env.geometry();
        let mut guard: Geometry = geometry.clone();
        guard.disk_radius *= 1.0 + WALKER_MARGIN;
        let target = geometry.feasible_optimum
            + geometry.corridor.direction * (WALKER_MARGIN * geometry.disk_radius);
        let limit = config.arena_half_width();
        let endpoint = |dir: Position, length: f64| {
            let q = p + dir * length;
            Position::new(q.x.clamp(-limit, limit), q.y.clamp(-limit, limit))
        };
        let safe = |dir: Position, length: f64| {
            let action = dir * (length / config.step_size);
            let action = [action.x, action.y];
            let landed = transition(config, geometry, p, action);
            let ok = !guard.segment_hits_cost_region(p, endpoint(dir, length))
                && landed.cost == 0.0
                && !landed.blocked;
            ok.then_some(action)
        };

        let delta = target - p;
        let dist = delta.norm();
        if dist <= ARRIVAL_EPS {
            return [0.0, 0.0];
        }
        let direct = delta * (1.0 / dist);
        let length = dist.min(config.step_size);
        if let Some(action) = safe(direct, length) {
            return action;
        }

        let step = std::f64::consts::PI / WALKER_ANGLE_STEPS as f64;
        for k in 1..=WALKER_ANGLE_STEPS {
            let mut best: Option<(f64, Action)> = None;
            for sign in [1.0, -1.0] {
                let dir = Self::rotate(direct, sign * k as f64 * step);
                let Some(action) = safe(dir, config.step_size) else {
                    continue;
                };
                let remaining = endpoint(dir, config.step_size).distance(target);
                // Positive rotation wins exact ties because it is tried first.
                if best.is_none_or(|(d, _)| remaining < d) {
                    best = Some((remaining, action));
                }
            }
            if let Some((_, action)) = best {
                return action;
            }
        }
        [0.0, 0.0]
    }
}

impl Policy for BoundaryWalker {
    fn act(&mut self, observation: Observation, env: &Circle2D) -> Action {
        Self::plan(env.position_of(observation), env)
    }
}
