//! Sweeps `step_size` and prints the discounted return of the scripted
//! boundary path from the init-region center on level 1.
//!
//! cargo run --example calibrate -- 2.5 2.85 3.2

use safebench::agents::{BoundaryWalker, Policy};
use safebench::circle2d::{episode_return, Circle2D, EnvConfig, Position};

fn main() {
    let steps: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("step size"))
        .collect();
    let steps = if steps.is_empty() {
        (0..=20).map(|i| 2.0 + 0.1 * i as f64).collect()
    } else {
        steps
    };
    for step_size in steps {
        let config = EnvConfig {
            step_size,
            ..EnvConfig::default()
        };
        let start = Position::new(
            0.5 * (1.05 + config.init_radius_multiplier) * config.constraint_radius,
            0.0,
        );
        let mut env = Circle2D::new(config.clone()).expect("valid config");
        let mut obs = env.reset_to(start).expect("finite start");
        let mut rewards = Vec::new();
        let mut cost = 0.0;
        loop {
            let out = env.step(BoundaryWalker.act(obs, &env)).expect("active episode");
            rewards.push(out.reward);
            cost += out.cost;
            obs = out.observation;
            if out.truncated || out.terminated {
                break;
            }
        }
        println!(
            "step_size {step_size:.3}  return {:.4}  cost {cost}",
            episode_return(&rewards, config.discount)
        );
    }
}
