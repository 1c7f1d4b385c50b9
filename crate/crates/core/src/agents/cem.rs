//! Cross-entropy planning over open-loop action sequences using the exact
//! environment model.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::circle2d::{clamp_action, transition, Action, EnvConfig, Geometry, Position};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CemParams {
    pub horizon: usize,
    pub iterations: usize,
    pub population: usize,
    pub elite_fraction: f64,
    /// Initial per-component sampling standard deviation.
    pub init_std: f64,
    pub min_std: f64,
    /// Evaluate the current mean alongside the random samples.
    pub include_mean: bool,
}

impl Default for CemParams {
    fn default() -> Self {
        Self {
            horizon: 8,
            iterations: 4,
            population: 64,
            elite_fraction: 0.125,
            init_std: 0.6,
            min_std: 0.05,
            include_mean: true,
        }
    }
}

impl CemParams {
    pub fn elite_count(&self) -> Result<usize, AgentError> {
        if self.horizon == 0 || self.iterations == 0 || self.population == 0 {
            return Err(AgentError::Config(
                "horizon, iterations and population must be positive".into(),
            ));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return Err(AgentError::Config(format!(
                "elite_fraction must be in (0, 1], got {}",
                self.elite_fraction
            )));
        }
        let n = (self.population as f64 * self.elite_fraction).floor() as usize;
        if n < 1 {
            return Err(AgentError::Config(format!(
                "population {} with elite fraction {} selects no elites",
                self.population, self.elite_fraction
            )));
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanScore {
    pub objective: f64,
    /// Discounted reward sum along the plan.
    pub discounted_return: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub actions: Vec<Action>,
    pub score: PlanScore,
}

/// Roll `actions` out from `start` and score `Σ γ^t r_t − λ Σ c_t`.
pub fn score_plan(
    config: &EnvConfig,
    geometry: &Geometry,
    start: Position,
    actions: &[Action],
    lambda: f64,
) -> PlanScore {
    let mut p = start;
    let mut weight = 1.0;
    let mut ret = 0.0;
    let mut cost = 0.0;
    for &a in actions {
        let step = transition(config, geometry, p, a);
        ret += weight * step.reward;
        cost += step.cost;
        weight *= config.discount;
        p = step.position;
    }
    PlanScore {
        objective: ret - lambda * cost,
        discounted_return: ret,
        cost,
    }
}

/// Draw one sequence with components `N(mean, std)` clamped to `[-1, 1]`.
pub fn sample_sequence<R: Rng + ?Sized>(mean: &[Action], std: &[Action], rng: &mut R) -> Vec<Action> {
    mean.iter()
        .zip(std)
        .map(|(m, s)| {
            let mut a = [0.0; 2];
            for d in 0..2 {
                let z: f64 = StandardNormal.sample(rng);
                a[d] = m[d] + s[d] * z;
            }
            clamp_action(a)
        })
        .collect()
}

/// Cross-entropy optimization of an action sequence from `start`.
///
/// Returns the final elite mean, unless some evaluated sample scored strictly
/// better, in which case that sample is returned.
#[allow(clippy::too_many_arguments)]
pub fn cem_plan<R: Rng + ?Sized>(
    config: &EnvConfig,
    geometry: &Geometry,
    start: Position,
    params: &CemParams,
    lambda: f64,
    warm_start: Option<&[Action]>,
    rng: &mut R,
) -> Result<Plan, AgentError> {
    let elites = params.elite_count()?;
    let h = params.horizon;
    let mut mean: Vec<Action> = match warm_start {
        Some(w) => (0..h).map(|t| clamp_action(w.get(t).copied().unwrap_or([0.0, 0.0]))).collect(),
        None => vec![[0.0, 0.0]; h],
    };
    let mut std = vec![[params.init_std; 2]; h];
    let mut best: Option<Plan> = None;

    for _ in 0..params.iterations {
        let mut candidates: Vec<Plan> = Vec::with_capacity(params.population + 1);
        if params.include_mean {
            let score = score_plan(config, geometry, start, &mean, lambda);
            candidates.push(Plan {
                actions: mean.clone(),
                score,
            });
        }
        for _ in 0..params.population {
            let actions = sample_sequence(&mean, &std, rng);
            let score = score_plan(config, geometry, start, &actions, lambda);
            candidates.push(Plan { actions, score });
        }
        // Stable sort keeps sampling order among equal objectives.
        candidates.sort_by(|a, b| b.score.objective.total_cmp(&a.score.objective));
        if best
            .as_ref()
            .is_none_or(|b| candidates[0].score.objective > b.score.objective)
        {
            best = Some(candidates[0].clone());
        }
        let elite = &candidates[..elites];
        let n = elite.len() as f64;
        for t in 0..h {
            for d in 0..2 {
                let m = elite.iter().map(|c| c.actions[t][d]).sum::<f64>() / n;
                let var = elite
                    .iter()
                    .map(|c| (c.actions[t][d] - m).powi(2))
                    .sum::<f64>()
                    / n;
                mean[t][d] = m;
                std[t][d] = var.sqrt().max(params.min_std);
            }
        }
    }

    let score = score_plan(config, geometry, start, &mean, lambda);
    let best = best.expect("at least one iteration");
    if best.score.objective > score.objective {
        Ok(best)
    } else {
        Ok(Plan {
            actions: mean,
            score,
        })
    }
}
