use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::EnvError;

/// Per-unit-action displacement that puts the scripted boundary path's
/// discounted return inside [-12, -11] at default settings.
pub const DEFAULT_STEP_SIZE: f64 = 2.85;

/// Circle2D customization parameters.
///
/// Field names follow the environment's documented parameter table, so a flat
/// JSON object with these keys deserializes directly. Missing keys take their
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub level: u8,
    pub constraint_radius: f64,
    pub init_radius_multiplier: f64,
    pub corridor_height_factor: f64,
    pub init_region_size: f64,
    pub optima_perturbation: [f64; 2],
    pub infeasible_region_penetratable: bool,
    pub reset_on_cost: bool,
    pub allow_infeasible_init: bool,
    pub sparse_reward: bool,
    pub max_episode_steps: u32,
    pub step_size: f64,
    pub discount: f64,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            level: 1,
            constraint_radius: 10.0,
            init_radius_multiplier: 1.5,
            corridor_height_factor: 0.5,
            init_region_size: 0.5,
            optima_perturbation: [0.0, 0.0],
            infeasible_region_penetratable: true,
            reset_on_cost: false,
            allow_infeasible_init: false,
            sparse_reward: false,
            max_episode_steps: 50,
            step_size: DEFAULT_STEP_SIZE,
            discount: 0.99,
            seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn with_level(level: u8) -> Self {
        Self {
            level,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |msg: String| Err(EnvError::InvalidConfig(msg));
        if self.level > 3 {
            return bad(format!("level must be in 0..=3, got {}", self.level));
        }
        if !(self.constraint_radius.is_finite() && self.constraint_radius > 0.0) {
            return bad(format!(
                "constraint_radius must be positive, got {}",
                self.constraint_radius
            ));
        }
        if !(self.init_radius_multiplier.is_finite() && self.init_radius_multiplier > 1.0) {
            return bad(format!(
                "init_radius_multiplier must exceed 1, got {}",
                self.init_radius_multiplier
            ));
        }
        if !(self.corridor_height_factor > 0.0 && self.corridor_height_factor < 1.0) {
            return bad(format!(
                "corridor_height_factor must be in (0, 1), got {}",
                self.corridor_height_factor
            ));
        }
        if !(self.init_region_size > 0.0 && self.init_region_size <= 1.0) {
            return bad(format!(
                "init_region_size must be in (0, 1], got {}",
                self.init_region_size
            ));
        }
        if !self.optima_perturbation.iter().all(|v| v.is_finite()) {
            return bad("optima_perturbation must be finite".into());
        }
        if self.max_episode_steps < 1 {
            return bad("max_episode_steps must be at least 1".into());
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return bad(format!("step_size must be positive, got {}", self.step_size));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return bad(format!("discount must be in [0, 1], got {}", self.discount));
        }
        Ok(())
    }

    /// Whether the agent may move through the cost region. Level 0 is never
    /// penetrable.
    pub fn penetrable(&self) -> bool {
        self.level != 0 && self.infeasible_region_penetratable
    }

    /// Half-width of the square arena, `init_radius_multiplier * constraint_radius`.
    pub fn arena_half_width(&self) -> f64 {
        self.init_radius_multiplier * self.constraint_radius
    }

    /// Stable hex digest of the canonical JSON form. Used to tie logs to the
    /// configuration that produced them.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("EnvConfig serializes");
        let hash = Sha256::digest(canonical.as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json(text: &str) -> Result<Self, EnvError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        EnvConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range_fields() {
        let cases = [
            EnvConfig {
                level: 4,
                ..Default::default()
            },
            EnvConfig {
                constraint_radius: 0.0,
                ..Default::default()
            },
            EnvConfig {
                init_radius_multiplier: 1.0,
                ..Default::default()
            },
            EnvConfig {
                corridor_height_factor: 1.0,
                ..Default::default()
            },
            EnvConfig {
                init_region_size: 0.0,
                ..Default::default()
            },
            EnvConfig {
                max_episode_steps: 0,
                ..Default::default()
            },
            EnvConfig {
                discount: 1.5,
                ..Default::default()
            },
        ];
        for config in cases {
            assert!(config.validate().is_err(), "{config:?}");
        }
    }

    #[test]
    fn level_zero_is_never_penetrable() {
        let config = EnvConfig {
            level: 0,
            infeasible_region_penetratable: true,
            ..Default::default()
        };
        assert!(!config.penetrable());
        assert!(EnvConfig::with_level(2).penetrable());
    }

    #[test]
    fn parses_partial_flat_document() {
        let config = EnvConfig::from_json(r#"{"level": 3, "sparse_reward": true}"#).unwrap();
        assert_eq!(config.level, 3);
        assert!(config.sparse_reward);
        assert_eq!(config.constraint_radius, 10.0);
        assert!(EnvConfig::from_json(r#"{"levle": 3}"#).is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = EnvConfig::default();
        let b = EnvConfig::with_level(2);
        assert_eq!(a.digest(), EnvConfig::default().digest());
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
    }
}
