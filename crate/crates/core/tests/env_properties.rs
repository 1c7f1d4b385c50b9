use proptest::prelude::*;
use safebench::circle2d::{reward_at, transition, Circle2D, EnvConfig, Geometry, Position};

fn action() -> impl Strategy<Value = [f64; 2]> {
    [-1.5f64..1.5, -1.5f64..1.5]
}

fn arena_point() -> impl Strategy<Value = Position> {
    (-15.0f64..=15.0, -15.0f64..=15.0).prop_map(|(x, y)| Position::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn level_zero_never_enters_cost_region(seed in any::<u64>(), actions in prop::collection::vec(action(), 1..50)) {
        let mut env = Circle2D::new(EnvConfig::with_level(0)).unwrap();
        env.reset(Some(seed));
        for a in actions {
            let out = env.step(a).unwrap();
            prop_assert!(!env.geometry().in_cost_region(out.position));
            if out.truncated {
                break;
            }
        }
    }

    #[test]
    fn cost_flags_cost_region(level in 1u8..=3, p in arena_point(), a in action()) {
        let config = EnvConfig::with_level(level);
        let geometry = Geometry::build(&config).unwrap();
        let t = transition(&config, &geometry, p, a);
        prop_assert_eq!(t.cost == 1.0, geometry.in_cost_region(t.position));
        prop_assert!(t.cost == 0.0 || t.cost == 1.0);
    }

    #[test]
    fn reward_decreases_with_distance(p in arena_point(), q in arena_point()) {
        let config = EnvConfig::default();
        let geometry = Geometry::build(&config).unwrap();
        let dp = p.distance(geometry.infeasible_optimum);
        let dq = q.distance(geometry.infeasible_optimum);
        let (rp, rq) = (reward_at(&config, &geometry, p), reward_at(&config, &geometry, q));
        if dp < dq {
            prop_assert!(rp > rq);
        }
        prop_assert!(rp <= 0.0);
        prop_assert_eq!(rp == 0.0, dp == 0.0);
    }

    #[test]
    fn episodes_respect_length_cap_and_single_cost(
        seed in any::<u64>(),
        level in 0u8..=3,
        actions in prop::collection::vec(action(), 1..200),
    ) {
        let config = EnvConfig { reset_on_cost: true, max_episode_steps: 20, ..EnvConfig::with_level(level) };
        let mut env = Circle2D::new(config).unwrap();
        env.reset(Some(seed));
        let (mut len, mut cost) = (0u32, 0.0);
        for a in actions {
            let out = env.step(a).unwrap();
            len += 1;
            cost += out.cost;
            prop_assert!(len <= 20);
            prop_assert!(cost <= 1.0);
            if out.terminated || out.truncated {
                env.reset(None);
                len = 0;
                cost = 0.0;
            }
        }
    }

    #[test]
    fn identical_inputs_identical_results(seed in any::<u64>(), level in 0u8..=3, actions in prop::collection::vec(action(), 1..50)) {
        let run = || {
            let mut env = Circle2D::new(EnvConfig::with_level(level)).unwrap();
            let first = env.reset(Some(seed));
            let steps: Vec<_> = actions.iter().map_while(|&a| env.step(a).ok()).collect();
            (first, steps)
        };
        let (a, b) = (run(), run());
        prop_assert_eq!(a.0.map(f64::to_bits), b.0.map(f64::to_bits));
        prop_assert_eq!(a.1, b.1);
    }

    #[test]
    fn optima_are_where_they_belong(level in 0u8..=3) {
        let geometry = Geometry::build(&EnvConfig::with_level(level)).unwrap();
        prop_assert!(!geometry.in_cost_region(geometry.feasible_optimum));
        prop_assert!(geometry.in_cost_region(geometry.infeasible_optimum));
    }
}
