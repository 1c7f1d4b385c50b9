//! Derived artifacts from trajectory logs: visitation heatmaps, training
//! curves, and their SVG renderings. Every chart has a CSV with exactly the
//! plotted numbers.

mod curves;
mod heatmap;
mod svg;

pub use curves::{curve_rows, curves_to_csv, rollout_points, CurveRow, RolloutPoint};
pub use heatmap::{part_grids, HeatmapGrid, DEFAULT_RESOLUTION};
pub use svg::{ramp_color, render_curves_svg, render_heatmap_svg};

use thiserror::Error;

use crate::metrics::MetricsError;
use crate::rollout_log::LogError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("no episodes to analyze")]
    Empty,
    #[error("logs come from different configurations ({0} vs {1})")]
    ConfigMismatch(String, String),
    #[error("invalid grid: {0}")]
    Grid(String),
}
