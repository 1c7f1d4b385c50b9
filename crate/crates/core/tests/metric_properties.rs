mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{emcc_oracle, episodes_from_costs, random_stream};
use safebench::metrics::{emcc_beta_alpha, mcc_of_rollout, stream_from_episodes, EpisodeCosts};
use safebench::rollout_log::group_rollouts;

fn stream_strategy() -> impl Strategy<Value = Vec<Vec<Vec<f64>>>> {
    any::<u64>().prop_map(|seed| random_stream(&mut ChaCha8Rng::seed_from_u64(seed), 30, 6, 40))
}

fn to_stream(rollouts: &[Vec<Vec<f64>>]) -> Vec<safebench::metrics::RolloutGroup> {
    stream_from_episodes(
        rollouts
            .iter()
            .map(|r| r.iter().map(|e| EpisodeCosts::new(e.clone()).unwrap()).collect())
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mcc_bounds_and_extremes(rollouts in stream_strategy()) {
        for (group, raw) in to_stream(&rollouts).iter().zip(&rollouts) {
            let mcc = mcc_of_rollout(group).unwrap().value;
            prop_assert!((0.0..=1.0).contains(&mcc));
            let any_cost = raw.iter().flatten().any(|&c| c > 0.0);
            let all_cost_episode = raw.iter().any(|e| e.iter().all(|&c| c > 0.0));
            prop_assert_eq!(mcc == 0.0, !any_cost);
            prop_assert_eq!(mcc == 1.0, all_cost_episode);
        }
    }

    #[test]
    fn emcc_nonincreasing_in_alpha(rollouts in stream_strategy(), part in 1usize..=3) {
        let stream = to_stream(&rollouts);
        let mut previous = f64::INFINITY;
        for alpha in [0.05, 0.1, 0.2, 0.33, 0.5, 0.75, 1.0] {
            if let Some(v) = emcc_beta_alpha(&stream, part, alpha).unwrap() {
                prop_assert!(v <= previous);
                previous = v;
            }
        }
    }

    #[test]
    fn emcc_equals_oracle(rollouts in stream_strategy(), part in 1usize..=3, num in 1usize..=10) {
        let alpha = num as f64 / 10.0;
        let stream = group_rollouts(&episodes_from_costs(&rollouts)).unwrap();
        let got = emcc_beta_alpha(&stream, part, alpha).unwrap();
        let want = emcc_oracle(&rollouts, part, num, 10);
        prop_assert_eq!(got.map(f64::to_bits), want.map(f64::to_bits));
    }

    #[test]
    fn stretching_episodes_keeps_mcc(rollouts in stream_strategy()) {
        let stretched: Vec<Vec<Vec<f64>>> = rollouts
            .iter()
            .map(|r| r.iter().map(|e| e.iter().flat_map(|&c| [c, c]).collect()).collect())
            .collect();
        for (a, b) in to_stream(&rollouts).iter().zip(&to_stream(&stretched)) {
            prop_assert_eq!(mcc_of_rollout(a).unwrap().value, mcc_of_rollout(b).unwrap().value);
        }
    }

    #[test]
    fn cumulative_indices_are_running_sums(rollouts in stream_strategy()) {
        let stream = group_rollouts(&episodes_from_costs(&rollouts)).unwrap();
        let mut total = 0u64;
        for (group, raw) in stream.iter().zip(&rollouts) {
            total += raw.iter().map(|e| e.len() as u64).sum::<u64>();
            prop_assert_eq!(group.cumulative_step_index, total);
        }
    }
}
