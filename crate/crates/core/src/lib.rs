//! Safe-exploration benchmarking: the Circle2D environments, consecutive-cost
//! metrics (MCC / EMCC), trajectory logs, baseline agents, analysis and a
//! network environment server.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle2d;
pub mod metrics;
pub mod rollout_log;
pub mod agents;
pub mod analysis;
pub mod server;
pub mod cli;
