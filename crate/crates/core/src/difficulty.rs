//! Hashrate-to-difficulty map and per-block difficulty retargeting.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Observed (hashrate MH/s, difficulty) pairs the default map is fitted to.
pub const ANCHORS: [(f64, f64); 3] = [(40.0, 1.75), (51.0, 2.20), (55.0, 2.37)];

pub const DEFAULT_FLOOR: f64 = 1e-6;

/// Hashrate range (MH/s) over which a map must give positive difficulty.
pub const OPERATING_RANGE: (f64, f64) = (1.0, 200.0);

/// Affine relation between network hashrate and difficulty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapRecord", into = "MapRecord")]
pub struct DifficultyMap {
    slope: f64,
    intercept: f64,
    floor: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapRecord {
    slope: f64,
    intercept: f64,
    #[serde(default = "default_floor")]
    floor: f64,
}

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

impl TryFrom<MapRecord> for DifficultyMap {
    type Error = Error;

    fn try_from(r: MapRecord) -> Result<Self> {
        Self::with_floor(r.slope, r.intercept, r.floor)
    }
}

impl From<DifficultyMap> for MapRecord {
    fn from(m: DifficultyMap) -> Self {
        Self {
            slope: m.slope,
            intercept: m.intercept,
            floor: m.floor,
        }
    }
}

impl DifficultyMap {
    pub fn new(slope: f64, intercept: f64) -> Result<Self> {
        Self::with_floor(slope, intercept, DEFAULT_FLOOR)
    }

    pub fn with_floor(slope: f64, intercept: f64, floor: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Error::InvalidParam {
                field: "slope",
                reason: "must be positive and finite",
            });
        }
        if !intercept.is_finite() {
            return Err(Error::InvalidParam {
                field: "intercept",
                reason: "must be finite",
            });
        }
        if !(slope * OPERATING_RANGE.0 + intercept > 0.0) {
            return Err(Error::InvalidParam {
                field: "intercept",
                reason: "mapped difficulty must be positive over 1..200 MH/s",
            });
        }
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(Error::InvalidParam {
                field: "floor",
                reason: "must be positive and finite",
            });
        }
        Ok(Self {
            slope,
            intercept,
            floor,
        })
    }

    /// Least-squares line through `points`.
    pub fn fit(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain("need at least two points to fit a line"));
        }
        let n = points.len() as f64;
        let mean_h = points.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_d = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mean_h) * (p.0 - mean_h)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mean_h) * (p.1 - mean_d)).sum();
        if sxx == 0.0 {
            return Err(Error::Domain("hashrates of the fit points must differ"));
        }
        let slope = sxy / sxx;
        Self::new(slope, mean_d - slope * mean_h)
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn hash_to_difficulty(&self, hashrate: f64) -> Result<f64> {
        if !(hashrate >= 0.0) || !hashrate.is_finite() {
            return Err(Error::Domain("hashrate must be finite and nonnegative"));
        }
        Ok((self.slope * hashrate + self.intercept).max(self.floor))
    }
}

impl Default for DifficultyMap {
    /// Line fitted to [`ANCHORS`].
    fn default() -> Self {
        Self::fit(&ANCHORS).expect("anchor fit is well posed")
    }
}

/// Retarget constants as they appear in configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetargetParams {
    /// Seconds.
    pub target_interval: f64,
    pub smoothing: f64,
    pub clamp: f64,
}

impl Default for RetargetParams {
    fn default() -> Self {
        Self {
            target_interval: 120.0,
            smoothing: 0.1,
            clamp: 4.0,
        }
    }
}

impl RetargetParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_interval > 0.0 && self.target_interval.is_finite()) {
            return Err(Error::InvalidParam {
                field: "target_interval",
                reason: "must be positive and finite",
            });
        }
        if !(self.smoothing > 0.0 && self.smoothing <= 1.0) {
            return Err(Error::InvalidParam {
                field: "smoothing",
                reason: "must lie in (0, 1]",
            });
        }
        if !(self.clamp > 1.0 && self.clamp.is_finite()) {
            return Err(Error::InvalidParam {
                field: "clamp",
                reason: "must be finite and greater than 1",
            });
        }
        Ok(())
    }
}

/// Retarget controller state: current difficulty plus exponential moving
/// averages of block intervals and of the difficulty they were mined at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetargetState {
    pub current_difficulty: f64,
    pub ema_difficulty: f64,
    pub ema_interval: f64,
    pub target_interval: f64,
    pub smoothing: f64,
    pub clamp: f64,
}

impl RetargetState {
    /// Starts at `difficulty` with the interval average sitting on target.
    pub fn new(difficulty: f64, params: &RetargetParams) -> Result<Self> {
        params.validate()?;
        if !(difficulty > 0.0 && difficulty.is_finite()) {
            return Err(Error::InvalidParam {
                field: "current_difficulty",
                reason: "must be positive and finite",
            });
        }
        Ok(Self {
            current_difficulty: difficulty,
            ema_difficulty: difficulty,
            ema_interval: params.target_interval,
            target_interval: params.target_interval,
            smoothing: params.smoothing,
            clamp: params.clamp,
        })
    }

    /// Folds the block just mined (its interval and the current difficulty)
    /// into the averages, then sets difficulty to
    /// `average difficulty * target / average interval`. The interval ratio
    /// and the step from the current difficulty are each limited to a factor
    /// of `clamp`.
    pub fn retarget(&self, observed_interval: f64) -> Result<Self> {
        if !(observed_interval > 0.0) || !observed_interval.is_finite() {
            return Err(Error::Domain(
                "observed interval must be positive and finite",
            ));
        }
        let s = self.smoothing;
        let ema_interval = s * observed_interval + (1.0 - s) * self.ema_interval;
        let ema_difficulty = s * self.current_difficulty + (1.0 - s) * self.ema_difficulty;
        let ratio = (ema_interval / self.target_interval).clamp(1.0 / self.clamp, self.clamp);
        let next = (ema_difficulty / ratio).clamp(
            self.current_difficulty / self.clamp,
            self.current_difficulty * self.clamp,
        );
        Ok(Self {
            current_difficulty: next,
            ema_difficulty,
            ema_interval,
            ..*self
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(difficulty: f64, smoothing: f64) -> RetargetState {
        RetargetState::new(
            difficulty,
            &RetargetParams {
                target_interval: 120.0,
                smoothing,
                clamp: 4.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn default_map_matches_anchor_fit() {
        let m = DifficultyMap::default();
        assert!((m.slope() - 0.04124).abs() < 5e-5, "{}", m.slope());
        assert!((m.intercept() - 0.0995).abs() < 5e-4, "{}", m.intercept());
        assert!((m.hash_to_difficulty(40.0).unwrap() - 1.749).abs() < 1e-3);
    }

    #[test]
    fn proportional_map() {
        let m = DifficultyMap::new(0.05, 0.0).unwrap();
        assert!((m.hash_to_difficulty(20.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(m.hash_to_difficulty(0.0).unwrap(), DEFAULT_FLOOR);
    }

    #[test]
    fn zero_hashrate_gives_intercept() {
        let m = DifficultyMap::default();
        assert_eq!(m.hash_to_difficulty(0.0).unwrap(), m.intercept());
    }

    #[test]
    fn map_rejects_bad_input() {
        assert!(DifficultyMap::new(0.0, 1.0).is_err());
        assert!(DifficultyMap::new(0.01, -0.5).is_err());
        assert!(matches!(
            DifficultyMap::default().hash_to_difficulty(-1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn on_target_is_fixed_point() {
        let s = state(2.0, 0.1);
        assert_eq!(s.retarget(120.0).unwrap(), s);
    }

    #[test]
    fn exact_doubling() {
        let s = state(2.0, 1.0).retarget(60.0).unwrap();
        assert_eq!(s.current_difficulty, 4.0);
    }

    #[test]
    fn clamp_binds() {
        let s = state(2.0, 1.0).retarget(1.0).unwrap();
        assert_eq!(s.current_difficulty, 8.0);
        let s = state(2.0, 1.0).retarget(1e6).unwrap();
        assert_eq!(s.current_difficulty, 0.5);
    }

    #[test]
    fn nonpositive_interval_rejected() {
        assert!(state(2.0, 0.1).retarget(0.0).is_err());
        assert!(state(2.0, 0.1).retarget(-3.0).is_err());
    }

    #[test]
    fn params_validation() {
        let bad = RetargetParams {
            smoothing: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RetargetParams {
            clamp: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
