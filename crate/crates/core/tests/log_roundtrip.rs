use std::io::Cursor;

use proptest::prelude::*;
use safebench::rollout_log::{read_log, write_episode, EpisodeHeader, LoggedEpisode, StepRecord};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(f64::MAX),
        -1.0f64..1.0,
    ]
}

fn episode(id: u64) -> impl Strategy<Value = LoggedEpisode> {
    (
        prop::collection::vec(
            (
                prop::collection::vec(finite(), 2),
                prop::collection::vec(finite(), 2),
                finite(),
                finite(),
            ),
            1..30,
        ),
        any::<u64>(),
        "[0-9a-f]{16}",
        any::<bool>(),
    )
        .prop_map(move |(steps, seed, digest, terminated)| {
            let n = steps.len();
            LoggedEpisode {
                header: EpisodeHeader {
                    episode_id: id,
                    rollout_id: id / 3,
                    seed,
                    env_config_digest: digest,
                    length: n as u64,
                },
                steps: steps
                    .into_iter()
                    .enumerate()
                    .map(|(t, (observation, action, reward, cost))| {
                        let last = t + 1 == n;
                        StepRecord {
                            t: t as u64,
                            observation,
                            action,
                            reward,
                            cost,
                            terminated: last && terminated,
                            truncated: last && !terminated,
                        }
                    })
                    .collect(),
            }
        })
}

fn log() -> impl Strategy<Value = Vec<LoggedEpisode>> {
    (0usize..8).prop_flat_map(|n| (0..n as u64).map(episode).collect::<Vec<_>>())
}

fn bits(episodes: &[LoggedEpisode]) -> Vec<u64> {
    episodes
        .iter()
        .flat_map(|e| &e.steps)
        .flat_map(|s| {
            s.observation
                .iter()
                .chain(&s.action)
                .chain([&s.reward, &s.cost])
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        })
        .collect()
}

proptest! {
    #[test]
    fn write_then_read_is_identity(episodes in log()) {
        let mut buf = Vec::new();
        for e in &episodes {
            write_episode(&mut buf, &e.header, &e.steps).unwrap();
        }
        let lines = buf.iter().filter(|&&b| b == b'\n').count();
        prop_assert_eq!(lines, episodes.iter().map(|e| e.steps.len() + 1).sum::<usize>());
        let back = read_log(Cursor::new(buf)).unwrap();
        prop_assert_eq!(bits(&back), bits(&episodes));
        prop_assert_eq!(back, episodes);
    }
}
