use std::sync::atomic::{AtomicU64, Ordering};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::circle2d::{Circle2D, EnvConfig, EnvError};

pub const PROTOCOL_VERSION: u64 = 1;

static NEXT_SESSION: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    Malformed,
    UnsupportedVersion,
    UnknownCmd,
    NoEpisode,
    InvalidConfig,
    InvalidAction,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Malformed => "malformed",
            Self::UnsupportedVersion => "unsupported_version",
            Self::UnknownCmd => "unknown_cmd",
            Self::NoEpisode => "no_episode",
            Self::InvalidConfig => "invalid_config",
            Self::InvalidAction => "invalid_action",
        }
    }
}

struct Failure(ErrorCode, String);

type Reply = Result<Map<String, Value>, Failure>;

fn fail<T>(code: ErrorCode, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(code, msg.into()))
}

/// Protocol state of one connection: at most one environment, requests
/// handled strictly in order. A rejected request leaves the state untouched.
#[derive(Debug)]
pub struct Session {
    id: String,
    default_config: EnvConfig,
    env: Option<Circle2D>,
    /// Source of seeds for resets that do not name one.
    seeds: ChaCha8Rng,
    closed: bool,
}

impl Session {
    /// A session whose `reset` before any `make` uses `default_config`.
    pub fn new(default_config: EnvConfig) -> Self {
        let n = NEXT_SESSION.fetch_add(1, Ordering::Relaxed);
        Self {
            id: format!("s{n}"),
            seeds: ChaCha8Rng::seed_from_u64(default_config.seed),
            default_config,
            env: None,
            closed: false,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn env(&self) -> Option<&Circle2D> {
        self.env.as_ref()
    }

    /// Handle one request line and return the response object.
    pub fn handle_line(&mut self, line: &str) -> Value {
        let reply = match serde_json::from_str::<Value>(line) {
            Ok(Value::Object(request)) => self.dispatch(&request),
            Ok(_) => fail(ErrorCode::Malformed, "request must be a JSON object"),
            Err(e) => fail(ErrorCode::Malformed, format!("invalid JSON: {e}")),
        };
        let mut body = match reply {
            Ok(body) => {
                let mut m = Map::new();
                m.insert("ok".into(), Value::Bool(true));
                m.extend(body);
                m
            }
            Err(Failure(code, msg)) => {
                let mut m = Map::new();
                m.insert("ok".into(), Value::Bool(false));
                m.insert("code".into(), json!(code.as_str()));
                m.insert("msg".into(), json!(msg));
                m
            }
        };
        body.insert("v".into(), json!(PROTOCOL_VERSION));
        Value::Object(body)
    }

    fn dispatch(&mut self, request: &Map<String, Value>) -> Reply {
        match request.get("v") {
            Some(v) if v.as_u64() == Some(PROTOCOL_VERSION) => {}
            Some(v) => return fail(ErrorCode::UnsupportedVersion, format!("unsupported version {v}")),
            None => return fail(ErrorCode::Malformed, "missing \"v\""),
        }
        let Some(cmd) = request.get("cmd").and_then(Value::as_str) else {
            return fail(ErrorCode::Malformed, "missing string \"cmd\"");
        };
        if self.closed {
            return fail(ErrorCode::NoEpisode, "session is closed");
        }
        match cmd {
            "make" => self.make(request.get("config")),
            "reset" => self.reset(request.get("seed")),
            "step" => self.step(request.get("action")),
            "config" => Ok(self.config()),
            "close" => {
                self.closed = true;
                self.env = None;
                Ok(Map::from_iter([("closed".to_string(), Value::Bool(true))]))
            }
            other => fail(ErrorCode::UnknownCmd, format!("unknown command {other:?}")),
        }
    }

    fn make(&mut self, config: Option<&Value>) -> Reply {
        let config = match config {
            None | Some(Value::Null) => self.default_config.clone(),
            Some(v) => serde_json::from_value::<EnvConfig>(v.clone())
                .map_err(|e| Failure(ErrorCode::InvalidConfig, e.to_string()))?,
        };
        let env = Circle2D::new(config).map_err(|e| Failure(ErrorCode::InvalidConfig, e.to_string()))?;
        let space = json!({"shape": [2], "low": -1.0, "high": 1.0, "dtype": "float64"});
        let digest = env.config().digest();
        self.seeds = ChaCha8Rng::seed_from_u64(env.config().seed);
        self.env = Some(env);
        Ok(Map::from_iter([
            ("session_id".to_string(), json!(self.id)),
            ("observation_space".to_string(), space.clone()),
            ("action_space".to_string(), space),
            ("env_config_digest".to_string(), json!(digest)),
        ]))
    }

    fn reset(&mut self, seed: Option<&Value>) -> Reply {
        let seed = match seed {
            None | Some(Value::Null) => self.seeds.next_u64(),
            Some(v) => match v.as_u64() {
                Some(s) => s,
                None => return fail(ErrorCode::Malformed, format!("seed must be a nonnegative integer, got {v}")),
            },
        };
        if self.env.is_none() {
            self.env = Some(
                Circle2D::new(self.default_config.clone())
                    .map_err(|e| Failure(ErrorCode::InvalidConfig, e.to_string()))?,
            );
        }
        let env = self.env.as_mut().expect("environment present");
        let observation = env.reset(Some(seed));
        Ok(Map::from_iter([
            ("observation".to_string(), json!(observation)),
            (
                "info".to_string(),
                json!({"seed": seed, "env_config_digest": env.config().digest()}),
            ),
        ]))
    }

    fn step(&mut self, action: Option<&Value>) -> Reply {
        let action = match action.and_then(Value::as_array).map(|a| a.as_slice()) {
            Some([x, y]) => match (x.as_f64(), y.as_f64()) {
                (Some(x), Some(y)) => [x, y],
                _ => return fail(ErrorCode::InvalidAction, "action components must be numbers"),
            },
            _ => return fail(ErrorCode::InvalidAction, "action must be an array of two numbers"),
        };
        let Some(env) = self.env.as_mut() else {
            return fail(ErrorCode::NoEpisode, EnvError::EpisodeNotActive.to_string());
        };
        let out = env.step(action).map_err(|e| match e {
            EnvError::InvalidAction(_) => Failure(ErrorCode::InvalidAction, e.to_string()),
            _ => Failure(ErrorCode::NoEpisode, e.to_string()),
        })?;
        Ok(Map::from_iter([
            ("observation".to_string(), json!(out.observation)),
            ("reward".to_string(), json!(out.reward)),
            ("cost".to_string(), json!(out.cost)),
            ("terminated".to_string(), json!(out.terminated)),
            ("truncated".to_string(), json!(out.truncated)),
            ("info".to_string(), json!({"cost": out.cost})),
        ]))
    }

    fn config(&self) -> Map<String, Value> {
        let config = self.env.as_ref().map_or(&self.default_config, |e| e.config());
        Map::from_iter([
            ("config".to_string(), serde_json::to_value(config).expect("serializable")),
            ("env_config_digest".to_string(), json!(config.digest())),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(s: &mut Session, line: &str) -> Value {
        s.handle_line(line)
    }

    #[test]
    fn identity_step_at_feasible_start() {
        let mut s = Session::new(EnvConfig::default());
        let made = call(&mut s, r#"{"v":1,"cmd":"make","config":{"level":1}}"#);
        assert_eq!(made["ok"], true);
        assert_eq!(made["session_id"], s.id());
        let reset = call(&mut s, r#"{"v":1,"cmd":"reset","seed":4}"#);
        let step = call(&mut s, r#"{"v":1,"cmd":"step","action":[0,0]}"#);
        assert_eq!(step["cost"], 0.0);
        assert_eq!(step["observation"], reset["observation"]);
        assert_eq!(reset["info"]["seed"], 4);
    }

    #[test]
    fn error_codes() {
        let mut s = Session::new(EnvConfig::default());
        let code = |v: Value| v["code"].as_str().unwrap().to_string();
        assert_eq!(code(call(&mut s, "{")), "malformed");
        assert_eq!(code(call(&mut s, "[1]")), "malformed");
        assert_eq!(code(call(&mut s, r#"{"cmd":"reset"}"#)), "malformed");
        assert_eq!(code(call(&mut s, r#"{"v":2,"cmd":"reset"}"#)), "unsupported_version");
        assert_eq!(code(call(&mut s, r#"{"v":1,"cmd":"fly"}"#)), "unknown_cmd");
        assert_eq!(code(call(&mut s, r#"{"v":1,"cmd":"step","action":[0,0]}"#)), "no_episode");
        assert_eq!(code(call(&mut s, r#"{"v":1,"cmd":"make","config":{"level":9}}"#)), "invalid_config");
        assert_eq!(code(call(&mut s, r#"{"v":1,"cmd":"make","config":{"lvl":1}}"#)), "invalid_config");
        call(&mut s, r#"{"v":1,"cmd":"reset"}"#);
        assert_eq!(code(call(&mut s, r#"{"v":1,"cmd":"step","action":[0]}"#)), "invalid_action");
        assert_eq!(code(call(&mut s, r#"{"v":1,"cmd":"step","action":["a",0]}"#)), "invalid_action");
        assert_eq!(call(&mut s, r#"{"v":1,"cmd":"step","action":[0,0]}"#)["ok"], true);
    }

    #[test]
    fn episode_truncates_after_limit() {
        let mut s = Session::new(EnvConfig::default());
        call(&mut s, r#"{"v":1,"cmd":"reset","seed":1}"#);
        let mut last = Value::Null;
        for _ in 0..50 {
            last = call(&mut s, r#"{"v":1,"cmd":"step","action":[0.1,0.2]}"#);
        }
        assert_eq!(last["truncated"], true);
        let after = call(&mut s, r#"{"v":1,"cmd":"step","action":[0,0]}"#);
        assert_eq!(after["code"], "no_episode");
    }

    #[test]
    fn unseeded_reset_reports_its_seed() {
        let mut s = Session::new(EnvConfig::default());
        let first = call(&mut s, r#"{"v":1,"cmd":"reset"}"#);
        let seed = first["info"]["seed"].as_u64().unwrap();
        let again = call(&mut s, &format!(r#"{{"v":1,"cmd":"reset","seed":{seed}}}"#));
        assert_eq!(first["observation"], again["observation"]);
    }

    #[test]
    fn close_ends_session() {
        let mut s = Session::new(EnvConfig::default());
        assert_eq!(call(&mut s, r#"{"v":1,"cmd":"close"}"#)["closed"], true);
        assert!(s.is_closed());
        assert_eq!(call(&mut s, r#"{"v":1,"cmd":"reset"}"#)["ok"], false);
    }
}
