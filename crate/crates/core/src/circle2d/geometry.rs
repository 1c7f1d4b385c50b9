//! Cost-region geometry for the Circle2D levels.
//!
//! The cost region is the open disk of radius `constraint_radius` around the
//! origin, minus a set of closed rectangular slots cut radially into it: the
//! left corridor on every level, two extra cutouts on level 2 and four on
//! level 3.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use super::{EnvConfig, EnvError};

/// Inner end of the left corridor, as a fraction of the disk radius.
pub const CORRIDOR_INNER_FRACTION: f64 = 0.2;
/// Outer end of every slot. Slots extend past the disk edge so their mouths
/// are open.
pub const SLOT_OUTER_FRACTION: f64 = 1.2;
/// Inner end of the level 2/3 cutouts.
pub const CUTOUT_INNER_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Position) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Position) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl From<[f64; 2]> for Position {
    fn from(v: [f64; 2]) -> Self {
        Self { x: v[0], y: v[1] }
    }
}

impl Add for Position {
    type Output = Position;
    fn add(self, rhs: Position) -> Position {
        Position::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Position {
    type Output = Position;
    fn sub(self, rhs: Position) -> Position {
        Position::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Position {
    type Output = Position;
    fn mul(self, rhs: f64) -> Position {
        Position::new(self.x * rhs, self.y * rhs)
    }
}

/// A closed rectangle aligned with a ray from the origin.
///
/// In slot coordinates `u` runs along `direction` and `v` across it; the slot
/// covers `inner <= u <= outer` and `|v| <= half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSlot {
    pub direction: Position,
    pub inner: f64,
    pub outer: f64,
    pub half_width: f64,
}

impl RadialSlot {
    fn frame(&self, p: Position) -> (f64, f64) {
        let d = self.direction;
        let u = p.dot(d);
        let v = d.x * p.y - d.y * p.x;
        (u, v)
    }

    pub fn contains(&self, p: Position) -> bool {
        let (u, v) = self.frame(p);
        u >= self.inner && u <= self.outer && v.abs() <= self.half_width
    }

    /// Closed parameter interval `[t0, t1] ⊆ [0, 1]` for which `a + t (b - a)`
    /// lies in the slot.
    fn clip_segment(&self, a: Position, b: Position) -> Option<(f64, f64)> {
        let (ua, va) = self.frame(a);
        let (ub, vb) = self.frame(b);
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        for (start, end, min, max) in [
            (ua, ub, self.inner, self.outer),
            (va, vb, -self.half_width, self.half_width),
        ] {
            let delta = end - start;
            if delta == 0.0 {
                if start < min || start > max {
                    return None;
                }
                continue;
            }
            let t_min = (min - start) / delta;
            let t_max = (max - start) / delta;
            let (enter, exit) = if t_min <= t_max {
                (t_min, t_max)
            } else {
                (t_max, t_min)
            };
            lo = lo.max(enter);
            hi = hi.min(exit);
            if lo > hi {
                return None;
            }
        }
        Some((lo, hi))
    }

    /// Corners in counter-clockwise order, for rendering.
    pub fn corners(&self) -> [Position; 4] {
        let d = self.direction;
        let n = Position::new(-d.y, d.x);
        let w = self.half_width;
        [
            d * self.inner - n * w,
            d * self.outer - n * w,
            d * self.outer + n * w,
            d * self.inner + n * w,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub disk_center: Position,
    pub disk_radius: f64,
    pub infeasible_optimum: Position,
    pub corridor: RadialSlot,
    pub cutouts: Vec<RadialSlot>,
    pub feasible_optimum: Position,
}

impl Geometry {
    pub fn build(config: &EnvConfig) -> Result<Self, EnvError> {
        config.validate()?;
        let r = config.constraint_radius;
        let half_width = 0.5 * config.corridor_height_factor * r;
        let slot = |direction: Position, inner: f64| RadialSlot {
            direction,
            inner: inner * r,
            outer: SLOT_OUTER_FRACTION * r,
            half_width,
        };
        let corridor = slot(Position::new(-1.0, 0.0), CORRIDOR_INNER_FRACTION);
        let cutout_dirs: &[Position] = match config.level {
            0 | 1 => &[],
            2 => &[Position::new(0.0, 1.0), Position::new(0.0, -1.0)],
            3 => &[
                Position::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
                Position::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
                Position::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
                Position::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
            ],
            other => return Err(EnvError::InvalidConfig(format!("unknown level {other}"))),
        };
        let cutouts = cutout_dirs
            .iter()
            .map(|&d| slot(d, CUTOUT_INNER_FRACTION))
            .collect();

        let infeasible_optimum = Position::from(config.optima_perturbation);
        // Closest point of the corridor centerline to the (possibly shifted)
        // infeasible optimum.
        let along = (-infeasible_optimum.x).clamp(corridor.inner, corridor.outer);
        let feasible_optimum = Position::new(-along, 0.0);

        Ok(Self {
            disk_center: Position::ORIGIN,
            disk_radius: r,
            infeasible_optimum,
            corridor,
            cutouts,
            feasible_optimum,
        })
    }

    pub fn slots(&self) -> impl Iterator<Item = &RadialSlot> {
        std::iter::once(&self.corridor).chain(self.cutouts.iter())
    }

    /// Inside the corridor or any cutout (closed rectangles).
    pub fn in_slot(&self, p: Position) -> bool {
        self.slots().any(|s| s.contains(p))
    }

    /// Strictly inside the disk and outside every slot. A point at exactly the
    /// disk radius is feasible.
    pub fn in_cost_region(&self, p: Position) -> bool {
        let offset = p - self.disk_center;
        offset.dot(offset) < self.disk_radius * self.disk_radius && !self.in_slot(p)
    }

    /// Whether any point of the closed segment `a -> b` lies in the cost region.
    pub fn segment_hits_cost_region(&self, a: Position, b: Position) -> bool {
        if self.in_cost_region(a) || self.in_cost_region(b) {
            return true;
        }
        let d = b - a;
        let f = a - self.disk_center;
        let qa = d.dot(d);
        if qa == 0.0 {
            return false;
        }
        let qb = 2.0 * f.dot(d);
        let qc = f.dot(f) - self.disk_radius * self.disk_radius;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc <= 0.0 {
            return false;
        }
        let root = disc.sqrt();
        let lo = ((-qb - root) / (2.0 * qa)).max(0.0);
        let hi = ((-qb + root) / (2.0 * qa)).min(1.0);
        if lo >= hi {
            return false;
        }
        // The open interval (lo, hi) is inside the disk; it is safe only if
        // the slots cover it completely.
        let mut covers: Vec<(f64, f64)> = self
            .slots()
            .filter_map(|s| s.clip_segment(a, b))
            .collect();
        covers.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut reached = lo;
        for (start, end) in covers {
            if start > reached {
                break;
            }
            reached = reached.max(end);
            if reached >= hi {
                return false;
            }
        }
        reached < hi
    }
}
