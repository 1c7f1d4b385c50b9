//! Line-delimited JSON trajectory logs (`.jsonl`).
//!
//! An episode is a header object `{"type":"episode", ...}` followed by one
//! `{"type":"step", ...}` object per transition.

mod adapter;
mod format;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

pub use adapter::{adapt_foreign_log, AdaptOptions, FieldMap};
pub use format::{
    group_rollouts, read_log, validate_episode, write_episode, EpisodeHeader, LoggedEpisode,
    StepRecord,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("episode {}: {msg}", episode_id.map_or_else(|| "?".to_string(), |id| id.to_string()))]
    Validation { episode_id: Option<u64>, msg: String },
    #[error("mapping error: {0}")]
    Config(String),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn read_log_file(path: &Path) -> Result<Vec<LoggedEpisode>, LogError> {
    read_log(BufReader::new(File::open(path)?))
}
