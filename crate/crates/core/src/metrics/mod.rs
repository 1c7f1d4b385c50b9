//! Safety metrics over training streams and evaluation episodes.

mod mcc;
mod report;
mod risk;

pub use mcc::{
    cost_rate, emcc, emcc_beta_alpha, emcc_for_parts, max_consecutive_cost_steps,
    mcc_of_rollout, part_of, partition_by_beta, stream_from_episodes, tail_count,
    upper_tail_mean, EpisodeCosts, MccSample, RolloutGroup, TRAINING_PARTS,
};
pub use report::{
    aggregate_rows, beta_label, evaluation_summary, mean_std, rows_to_csv, EmccEntry,
    EpisodeOutcome, EvaluationSummary, MetricReport, MetricRow, ReportSettings,
};
pub use risk::{cvar_alpha, var_alpha};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("episode has no steps")]
    EmptyEpisode,
    #[error("rollout {0} has no episodes")]
    EmptyRollout(u64),
    #[error("no values to aggregate")]
    EmptyValues,
    #[error("stream contains no environment steps")]
    ZeroSteps,
    #[error("risk level {0} out of range")]
    InvalidAlpha(f64),
    #[error("training part {part} out of range 1..={parts}")]
    InvalidPart { part: usize, parts: usize },
}
