use std::collections::HashMap;
use std::fmt::Write as _;

use super::AnalysisError;
use crate::circle2d::{EnvConfig, Position};
use crate::metrics::{part_of, TRAINING_PARTS};
use crate::rollout_log::{group_rollouts, LoggedEpisode};

pub const DEFAULT_RESOLUTION: usize = 100;

/// Visit counts on a square grid of `resolution × resolution` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub xmin: f64,
    pub ymin: f64,
    pub cell_width: f64,
    pub resolution: usize,
    /// Row-major by `y` cell: `counts[iy * resolution + ix]`.
    counts: Vec<u64>,
}

impl HeatmapGrid {
    /// Grid covering `[-half_width, half_width]²`.
    pub fn new(half_width: f64, resolution: usize) -> Result<Self, AnalysisError> {
        if resolution == 0 {
            return Err(AnalysisError::Grid("resolution must be positive".into()));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(AnalysisError::Grid(format!("half width {half_width}")));
        }
        Ok(Self {
            xmin: -half_width,
            ymin: -half_width,
            cell_width: 2.0 * half_width / resolution as f64,
            resolution,
            counts: vec![0; resolution * resolution],
        })
    }

    pub fn for_config(config: &EnvConfig, resolution: usize) -> Result<Self, AnalysisError> {
        Self::new(config.arena_half_width(), resolution)
    }

    fn axis_cell(&self, value: f64, min: f64) -> Option<usize> {
        let max = min + self.cell_width * self.resolution as f64;
        if !(value >= min && value <= max) {
            return None;
        }
        let i = ((value - min) / self.cell_width).floor() as usize;
        Some(i.min(self.resolution - 1))
    }

    /// Cell `(ix, iy)` of `p`, or `None` outside the grid. Points on the
    /// upper edge fall in the last cell.
    pub fn cell_of(&self, p: Position) -> Option<(usize, usize)> {
        Some((self.axis_cell(p.x, self.xmin)?, self.axis_cell(p.y, self.ymin)?))
    }

    /// Count one visit. Returns false if `p` is out of bounds.
    pub fn add(&mut self, p: Position) -> bool {
        match self.cell_of(p) {
            Some((ix, iy)) => {
                self.counts[iy * self.resolution + ix] += 1;
                true
            }
            None => false,
        }
    }

    pub fn count(&self, ix: usize, iy: usize) -> u64 {
        self.counts[iy * self.resolution + ix]
    }

    /// Add another grid's counts. Both grids must share bounds and resolution.
    pub fn merge(&mut self, other: &HeatmapGrid) {
        assert_eq!(self.counts.len(), other.counts.len(), "grid shapes differ");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn nonzero_cells(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// `ix,iy,x_center,y_center,count` for every nonzero cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ix,iy,x_center,y_center,count\n");
        for iy in 0..self.resolution {
            for ix in 0..self.resolution {
                let c = self.count(ix, iy);
                if c == 0 {
                    continue;
                }
                let x = self.xmin + (ix as f64 + 0.5) * self.cell_width;
                let y = self.ymin + (iy as f64 + 0.5) * self.cell_width;
                let _ = writeln!(out, "{ix},{iy},{x},{y},{c}");
            }
        }
        out
    }
}

/// One grid per training part, filled with the positions behind each logged
/// observation. Parts follow the rollout partition used by EMCC.
pub fn part_grids(
    episodes: &[LoggedEpisode],
    config: &EnvConfig,
    resolution: usize,
) -> Result<Vec<HeatmapGrid>, AnalysisError> {
    if episodes.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let groups = group_rollouts(episodes)?;
    let total = groups.last().map_or(0, |g| g.cumulative_step_index);
    let part: HashMap<u64, usize> = groups
        .iter()
        .map(|g| (g.rollout_id, part_of(g.cumulative_step_index, total, TRAINING_PARTS)))
        .collect();
    let scale = config.arena_half_width();
    let mut grids = vec![HeatmapGrid::for_config(config, resolution)?; TRAINING_PARTS];
    for episode in episodes {
        let grid = &mut grids[part[&episode.header.rollout_id] - 1];
        for step in &episode.steps {
            if let [x, y] = step.observation[..] {
                grid.add(Position::new(x * scale, y * scale));
            }
        }
    }
    Ok(grids)
}
