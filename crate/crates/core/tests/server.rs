use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use safebench::circle2d::{Circle2D, EnvConfig};
use safebench::server::serve_tcp;

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn connect(addr: std::net::SocketAddr) -> Self {
        let writer = TcpStream::connect(addr).unwrap();
        writer.set_nodelay(true).unwrap();
        Self {
            reader: BufReader::new(writer.try_clone().unwrap()),
            writer,
        }
    }

    fn raw(&mut self, line: &str) -> Value {
        self.writer.write_all(format!("{line}\n").as_bytes()).unwrap();
        let mut response = String::new();
        self.reader.read_line(&mut response).unwrap();
        serde_json::from_str(&response).unwrap()
    }

    fn call(&mut self, request: Value) -> Value {
        self.raw(&request.to_string())
    }
}

fn start_server() -> std::net::SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || serve_tcp(listener, EnvConfig::default()));
    addr
}

fn random_actions(seed: u64, n: usize) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2)])
        .collect()
}

/// Drive the same episode over the wire and in process, optionally
/// interleaving malformed requests, and compare every field bitwise.
fn compare_streams(client: &mut Client, config: Value, seed: u64, noise: bool) {
    let made = client.call(json!({"v": 1, "cmd": "make", "config": config}));
    assert_eq!(made["ok"], true, "{made}");
    let mut local = Circle2D::new(serde_json::from_value(config).unwrap()).unwrap();

    let reset = client.call(json!({"v": 1, "cmd": "reset", "seed": seed}));
    let obs = local.reset(Some(seed));
    assert_eq!(reset["observation"], json!(obs));
    assert_eq!(reset["info"]["env_config_digest"], json!(local.config().digest()));

    for (i, action) in random_actions(seed, 60).into_iter().enumerate() {
        if noise && i % 3 == 0 {
            for junk in [
                "{not json",
                r#"{"v":1,"cmd":"step","action":[1]}"#,
                r#"{"v":1,"cmd":"step","action":"left"}"#,
                r#"{"v":3,"cmd":"step","action":[1,1]}"#,
                r#"{"v":1,"cmd":"warp"}"#,
                r#"{"v":1,"cmd":"make","config":{"level":12}}"#,
            ] {
                assert_eq!(client.raw(junk)["ok"], false);
            }
        }
        let remote = client.call(json!({"v": 1, "cmd": "step", "action": action}));
        match local.step(action) {
            Ok(out) => {
                assert_eq!(remote["ok"], true);
                let remote_obs: Vec<f64> = serde_json::from_value(remote["observation"].clone()).unwrap();
                assert_eq!(
                    remote_obs.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                    out.observation.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
                );
                assert_eq!(remote["reward"].as_f64().unwrap().to_bits(), out.reward.to_bits());
                assert_eq!(remote["cost"].as_f64().unwrap().to_bits(), out.cost.to_bits());
                assert_eq!(remote["terminated"], out.terminated);
                assert_eq!(remote["truncated"], out.truncated);
            }
            Err(_) => assert_eq!(remote["code"], "no_episode"),
        }
    }
}

#[test]
fn responses_match_in_process_environment() {
    let addr = start_server();
    let mut client = Client::connect(addr);
    for (i, config) in [
        json!({"level": 0}),
        json!({"level": 1, "sparse_reward": true}),
        json!({"level": 2, "reset_on_cost": true}),
        json!({"level": 3, "max_episode_steps": 1000, "optima_perturbation": [1.0, -2.0]}),
    ]
    .into_iter()
    .enumerate()
    {
        compare_streams(&mut client, config, 100 + i as u64, false);
    }
}

#[test]
fn malformed_requests_leave_state_untouched() {
    let addr = start_server();
    let mut client = Client::connect(addr);
    for level in 0..=3 {
        compare_streams(&mut client, json!({"level": level}), level, true);
    }
}

#[test]
fn long_episode_matches_bitwise() {
    let addr = start_server();
    let mut client = Client::connect(addr);
    let config = json!({"level": 1, "max_episode_steps": 1000});
    client.call(json!({"v": 1, "cmd": "make", "config": config}));
    client.call(json!({"v": 1, "cmd": "reset", "seed": 77}));
    let mut local = Circle2D::new(serde_json::from_value(config).unwrap()).unwrap();
    local.reset(Some(77));
    for action in random_actions(5, 1000) {
        let remote = client.call(json!({"v": 1, "cmd": "step", "action": action}));
        let out = local.step(action).unwrap();
        assert_eq!(remote["reward"].as_f64().unwrap().to_bits(), out.reward.to_bits());
        assert_eq!(remote["cost"].as_f64().unwrap().to_bits(), out.cost.to_bits());
        assert_eq!(remote["info"]["cost"].as_f64().unwrap().to_bits(), out.cost.to_bits());
    }
}

#[test]
fn connections_are_independent() {
    let addr = start_server();
    let handles: Vec<_> = (0..4)
        .map(|i| {
            thread::spawn(move || {
                let mut client = Client::connect(addr);
                compare_streams(&mut client, json!({"level": i % 4}), i, i % 2 == 0);
                let id = client.call(json!({"v": 1, "cmd": "make"}))["session_id"].clone();
                assert_eq!(client.call(json!({"v": 1, "cmd": "close"}))["closed"], true);
                id
            })
        })
        .collect();
    let mut ids: Vec<String> = handles
        .into_iter()
        .map(|h| h.join().unwrap().as_str().unwrap().to_string())
        .collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 4);
}

#[test]
fn protocol_walkthrough() {
    let addr = start_server();
    let mut client = Client::connect(addr);
    let early = client.call(json!({"v": 1, "cmd": "step", "action": [0, 0]}));
    assert_eq!(early["code"], "no_episode");
    assert!(early["msg"].as_str().is_some_and(|m| !m.is_empty()));

    let made = client.call(json!({"v": 1, "cmd": "make", "config": {"level": 1}}));
    assert_eq!(made["action_space"]["shape"], json!([2]));
    assert_eq!(made["observation_space"]["low"], -1.0);
    let config = client.call(json!({"v": 1, "cmd": "config"}));
    assert_eq!(config["config"]["level"], 1);
    assert_eq!(config["config"]["max_episode_steps"], 50);

    let reset = client.call(json!({"v": 1, "cmd": "reset", "seed": 123}));
    let still = client.call(json!({"v": 1, "cmd": "step", "action": [0, 0]}));
    assert_eq!(still["cost"], 0.0);
    assert_eq!(still["observation"], reset["observation"]);
    let mut last = still;
    for _ in 1..50 {
        last = client.call(json!({"v": 1, "cmd": "step", "action": [0.3, 0.1]}));
    }
    assert_eq!(last["truncated"], true);
    assert_eq!(client.call(json!({"v": 1, "cmd": "step", "action": [0, 0]}))["code"], "no_episode");
    assert_eq!(client.call(json!({"v": 2, "cmd": "config"}))["code"], "unsupported_version");
    assert_eq!(client.call(json!({"v": 1, "cmd": "close"}))["ok"], true);
}
