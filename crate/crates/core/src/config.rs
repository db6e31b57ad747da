//! Experiment description shared by the library and the runner.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agents::{Hysteresis, PomCredit, PopulationSpec};
use crate::difficulty::{DifficultyMap, RetargetParams};
use crate::reward::{find_peak, Landmarks, RewardScheduleParams};
use crate::{Error, Result};

/// Hashrate (MH/s) and difficulty that should produce exactly one block per
/// target interval; fixes the default rate constant.
pub const RATE_ANCHOR: (f64, f64) = (40.0, 1.75);

pub const DEFAULT_LARGE_MINER_THRESHOLD: f64 = 5.0;

pub const DEFAULT_SIGNAL_SMOOTHING: f64 = 0.05;

/// How the block reward is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// Explicit curve parameters.
    Curve(RewardScheduleParams),
    /// Curve fitted to the three landmarks.
    Landmarks(Landmarks),
    /// Same reward at every difficulty.
    Constant { reward: f64 },
}

/// A resolved reward rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Curve {
        params: RewardScheduleParams,
        r_max: f64,
    },
    Constant(f64),
}

impl Schedule {
    pub fn reward(&self, difficulty: f64) -> Result<f64> {
        match self {
            Schedule::Curve { params, .. } => params.reward(difficulty),
            Schedule::Constant(r) => Ok(*r),
        }
    }

    pub fn max_reward(&self) -> f64 {
        match *self {
            Schedule::Curve { r_max, .. } => r_max,
            Schedule::Constant(r) => r,
        }
    }
}

impl ScheduleSpec {
    pub fn resolve(&self) -> Result<Schedule> {
        let params = match self {
            ScheduleSpec::Constant { reward } => {
                if !(*reward >= 0.0 && reward.is_finite()) {
                    return Err(Error::InvalidParam {
                        field: "reward",
                        reason: "must be nonnegative and finite",
                    });
                }
                return Ok(Schedule::Constant(*reward));
            }
            ScheduleSpec::Curve(p) => *p,
            ScheduleSpec::Landmarks(l) => l.calibrate()?,
        };
        let hi = match params.cutoff() {
            Some(c) => c.d_co() + 40.0 * c.spread(),
            None => 40.0 / params.base().a(),
        };
        let r_max = find_peak(&params, 0.0, hi)?.r_max;
        Ok(Schedule::Curve { params, r_max })
    }
}

/// Exogenous coin price per block height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PricePath {
    Constant(f64),
    /// Price per block; the last entry holds beyond the end.
    Series(Vec<f64>),
    /// `before` until height `at`, `after` from then on.
    Step {
        before: f64,
        after: f64,
        at: u64,
    },
}

impl PricePath {
    pub fn price_at(&self, height: u64) -> f64 {
        match self {
            PricePath::Constant(p) => *p,
            PricePath::Series(v) => {
                let i = usize::try_from(height)
                    .unwrap_or(usize::MAX)
                    .min(v.len() - 1);
                v[i]
            }
            PricePath::Step { before, after, at } => {
                if height < *at {
                    *before
                } else {
                    *after
                }
            }
        }
    }

    fn all_positive(&self) -> bool {
        let ok = |p: &f64| *p > 0.0 && p.is_finite();
        match self {
            PricePath::Constant(p) => ok(p),
            PricePath::Series(v) => !v.is_empty() && v.iter().all(ok),
            PricePath::Step { before, after, .. } => ok(before) && ok(after),
        }
    }
}

/// What to do when every miner has left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StallParams {
    /// Seconds to wait before miners re-decide.
    pub quantum: f64,
    /// Give up after this many consecutive empty quanta.
    pub max_quanta: u64,
}

impl Default for StallParams {
    fn default() -> Self {
        Self {
            quantum: 120.0,
            max_quanta: 100_000,
        }
    }
}

fn default_signal_smoothing() -> f64 {
    DEFAULT_SIGNAL_SMOOTHING
}

fn default_threshold() -> f64 {
    DEFAULT_LARGE_MINER_THRESHOLD
}

/// A complete, seeded experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub difficulty_map: DifficultyMap,
    #[serde(default)]
    pub retarget: RetargetParams,
    /// Blocks per second per (MH/s / difficulty). Defaults to the value that
    /// makes [`RATE_ANCHOR`] produce the target interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_constant: Option<f64>,
    pub population: PopulationSpec,
    #[serde(default)]
    pub hysteresis: Hysteresis,
    #[serde(default)]
    pub pom: PomCredit,
    pub price: PricePath,
    /// Blocks.
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
    /// MH/s; miners strictly above it count as large.
    #[serde(default = "default_threshold")]
    pub large_miner_threshold: f64,
    /// Blocks excluded from the equilibrium summary; defaults to 20% of the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(default)]
    pub stall: StallParams,
    /// Weight of the newest offered reward in the miners' smoothed reward
    /// signal; 1 means miners react to the instantaneous reward.
    #[serde(default = "default_signal_smoothing")]
    pub signal_smoothing: f64,
}

/// One validation failure, located by its path in the config document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn param_issue(prefix: &str, err: Error) -> ConfigIssue {
    match err {
        Error::InvalidParam { field, reason } => ConfigIssue {
            path: format!("{prefix}.{field}"),
            message: reason.to_string(),
        },
        other => ConfigIssue {
            path: prefix.to_string(),
            message: other.to_string(),
        },
    }
}

impl SimConfig {
    /// Every problem with the config, or an empty list.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        if let Err(e) = self.schedule.resolve() {
            let prefix = match self.schedule {
                ScheduleSpec::Curve(_) => "schedule.curve",
                ScheduleSpec::Landmarks(_) => "schedule.landmarks",
                ScheduleSpec::Constant { .. } => "schedule.constant",
            };
            out.push(param_issue(prefix, e));
        }
        if let Err(e) = self.retarget.validate() {
            out.push(param_issue("retarget", e));
        }
        if let Some(k) = self.rate_constant {
            if !(k > 0.0 && k.is_finite()) {
                out.push(ConfigIssue {
                    path: "rate_constant".into(),
                    message: "must be positive and finite".into(),
                });
            }
        }
        for (path, msg) in self.population.issues() {
            out.push(ConfigIssue {
                path: format!("population.{path}"),
                message: msg.into(),
            });
        }
        if let Err(e) = self.hysteresis.validate() {
            out.push(param_issue("hysteresis", e));
        }
        if !self.price.all_positive() {
            out.push(ConfigIssue {
                path: "price".into(),
                message: "every price must be positive and finite".into(),
            });
        }
        if !(self.large_miner_threshold > 0.0 && self.large_miner_threshold.is_finite()) {
            out.push(ConfigIssue {
                path: "large_miner_threshold".into(),
                message: "must be positive and finite".into(),
            });
        }
        if let Some(b) = self.burn_in {
            if self.horizon > 0 && b >= self.horizon {
                out.push(ConfigIssue {
                    path: "burn_in".into(),
                    message: "must be below the horizon".into(),
                });
            }
        }
        if !(self.signal_smoothing > 0.0 && self.signal_smoothing <= 1.0) {
            out.push(ConfigIssue {
                path: "signal_smoothing".into(),
                message: "must lie in (0, 1]".into(),
            });
        }
        if !(self.stall.quantum > 0.0 && self.stall.quantum.is_finite()) {
            out.push(ConfigIssue {
                path: "stall.quantum".into(),
                message: "must be positive and finite".into(),
            });
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            return Ok(());
        }
        let joined: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
        Err(Error::Config(joined.join("; ")))
    }

    pub fn rate_constant(&self) -> f64 {
        self.rate_constant
            .unwrap_or(RATE_ANCHOR.1 / (RATE_ANCHOR.0 * self.retarget.target_interval))
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in.unwrap_or(self.horizon / 5)
    }

    /// Compact JSON with object keys sorted, defaults filled in.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        value.to_string()
    }

    /// Lowercase hex SHA-256 of [`Self::canonical_json`].
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical_json().as_bytes());
        let mut out = String::with_capacity(64);
        for byte in hash.iter() {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}
