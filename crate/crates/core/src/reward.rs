//! Block reward as a function of network difficulty.
//!
//! The base curve `scale * sqrt((exp(-a*d) - exp(-b*d)) * d)` with `a < b`
//! grows from zero, peaks once and then decays like `exp(-a*d/2)`. An
//! optional logistic cutoff `1 / (1 + exp((d - d_co) / spread))` multiplies
//! the base curve and makes the high-difficulty side collapse much faster.

use serde::{Deserialize, Serialize};

use crate::search::{bisect, golden_section_max};
use crate::{Error, Result};

/// Absolute bracket width at which [`find_peak`] stops.
pub const PEAK_TOLERANCE: f64 = 1e-9;

/// Residual tolerance (in difficulty) of the shape fit in [`calibrate_schedule`].
pub const CALIBRATION_TOLERANCE: f64 = 1e-7;

/// Ratio `b / a` fixed during calibration.
pub const DEFAULT_SHAPE_RATIO: f64 = 4.0;

const LN_9: f64 = 2.197_224_577_336_219_4;

/// Parameters of the rising-then-decaying base curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseCurveParams {
    a: f64,
    b: f64,
    scale: f64,
}

impl BaseCurveParams {
    pub fn new(a: f64, b: f64, scale: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParam {
                field: "a",
                reason: "must be positive and finite",
            });
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParam {
                field: "b",
                reason: "must be positive and finite",
            });
        }
        if !(a < b) {
            return Err(Error::InvalidParam {
                field: "b",
                reason: "must be strictly greater than a",
            });
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParam {
                field: "scale",
                reason: "must be positive and finite",
            });
        }
        Ok(Self { a, b, scale })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(self, scale: f64) -> Result<Self> {
        Self::new(self.a, self.b, scale)
    }

    /// `exp(-a*d) - exp(-b*d)`, evaluated as `exp(-a*d) * -expm1(-(b-a)*d)`
    /// so it stays nonnegative and accurate for small `d`.
    fn gap(&self, d: f64) -> f64 {
        libm::exp(-self.a * d) * -libm::expm1(-(self.b - self.a) * d)
    }
}

/// Logistic cutoff. `spread` is the product of the two width constants of
/// the Fermi-Dirac form, which never enter separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffParams {
    d_co: f64,
    spread: f64,
}

impl CutoffParams {
    pub fn new(d_co: f64, spread: f64) -> Result<Self> {
        if !(d_co > 0.0 && d_co.is_finite()) {
            return Err(Error::InvalidParam {
                field: "d_co",
                reason: "must be positive and finite",
            });
        }
        if !(spread > 0.0 && spread.is_finite()) {
            return Err(Error::InvalidParam {
                field: "spread",
                reason: "must be positive and finite",
            });
        }
        Ok(Self { d_co, spread })
    }

    pub fn d_co(&self) -> f64 {
        self.d_co
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }
}

/// A complete reward schedule: the base curve, optionally cut off on the
/// high-difficulty side.
///
/// Serializes as a flat object `{"a", "b", "scale", "d_co", "spread"}`; the
/// two cutoff keys are either both present or both absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRecord", into = "ScheduleRecord")]
pub struct RewardScheduleParams {
    base: BaseCurveParams,
    cutoff: Option<CutoffParams>,
}

impl RewardScheduleParams {
    /// Builds a schedule. A cutoff must sit to the right of the base-curve
    /// peak, otherwise it would carve into the rising side.
    pub fn new(base: BaseCurveParams, cutoff: Option<CutoffParams>) -> Result<Self> {
        if let Some(c) = cutoff {
            if !(c.d_co > base_peak(&base).x) {
                return Err(Error::InvalidParam {
                    field: "d_co",
                    reason: "must exceed the base-curve peak location",
                });
            }
        }
        Ok(Self { base, cutoff })
    }

    pub fn base_only(base: BaseCurveParams) -> Self {
        Self { base, cutoff: None }
    }

    pub fn base(&self) -> &BaseCurveParams {
        &self.base
    }

    pub fn cutoff(&self) -> Option<&CutoffParams> {
        self.cutoff.as_ref()
    }

    pub fn reward(&self, d: f64) -> Result<f64> {
        reward(d, self)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRecord {
    a: f64,
    b: f64,
    scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d_co: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spread: Option<f64>,
}

impl TryFrom<ScheduleRecord> for RewardScheduleParams {
    type Error = Error;

    fn try_from(r: ScheduleRecord) -> Result<Self> {
        let base = BaseCurveParams::new(r.a, r.b, r.scale)?;
        let cutoff = match (r.d_co, r.spread) {
            (None, None) => None,
            (Some(d_co), Some(spread)) => Some(CutoffParams::new(d_co, spread)?),
            (Some(_), None) => {
                return Err(Error::InvalidParam {
                    field: "spread",
                    reason: "required when d_co is given",
                })
            }
            (None, Some(_)) => {
                return Err(Error::InvalidParam {
                    field: "d_co",
                    reason: "required when spread is given",
                })
            }
        };
        Self::new(base, cutoff)
    }
}

impl From<RewardScheduleParams> for ScheduleRecord {
    fn from(s: RewardScheduleParams) -> Self {
        Self {
            a: s.base.a,
            b: s.base.b,
            scale: s.base.scale,
            d_co: s.cutoff.map(|c| c.d_co),
            spread: s.cutoff.map(|c| c.spread),
        }
    }
}

fn check_difficulty(d: f64) -> Result<()> {
    if d >= 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain("difficulty must be finite and nonnegative"))
    }
}

/// Base reward at difficulty `d`.
pub fn base_reward(d: f64, p: &BaseCurveParams) -> Result<f64> {
    check_difficulty(d)?;
    Ok(p.scale * libm::sqrt(p.gap(d) * d))
}

/// Analytic `d/dd` of [`base_reward`]; undefined at `d = 0` where the square
/// root has a vertical tangent.
pub fn base_reward_slope(d: f64, p: &BaseCurveParams) -> Result<f64> {
    check_difficulty(d)?;
    if d == 0.0 {
        return Err(Error::Domain("slope is unbounded at zero difficulty"));
    }
    let gap = p.gap(d);
    let gap_slope = -p.a * libm::exp(-p.a * d) + p.b * libm::exp(-p.b * d);
    Ok(p.scale * (gap_slope * d + gap) / (2.0 * libm::sqrt(gap * d)))
}

/// Location and height of the base-curve maximum.
pub fn base_peak(p: &BaseCurveParams) -> crate::search::Maximum {
    // The radicand is log-concave with its maximum below 40/a for any b > a.
    golden_section_max(|d| base_reward(d, p), 0.0, 40.0 / p.a, PEAK_TOLERANCE)
        .expect("base curve is unimodal on its natural bracket")
}

/// Logistic cutoff factor at `d`, in `(0, 1)` and strictly decreasing.
pub fn cutoff_factor(d: f64, c: &CutoffParams) -> f64 {
    let x = (d - c.d_co) / c.spread;
    if x > 0.0 {
        let e = libm::exp(-x);
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + libm::exp(x))
    }
}

/// Scheduled block reward at difficulty `d`.
pub fn reward(d: f64, s: &RewardScheduleParams) -> Result<f64> {
    let base = base_reward(d, &s.base)?;
    Ok(match &s.cutoff {
        Some(c) => base * cutoff_factor(d, c),
        None => base,
    })
}

/// The maximizing difficulty and the maximum reward of a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub d_star: f64,
    pub r_max: f64,
}

/// Golden-section search for the schedule maximum inside `[lo, hi]`.
///
/// The bracket must contain the single interior maximum.
pub fn find_peak(s: &RewardScheduleParams, lo: f64, hi: f64) -> Result<Peak> {
    if !(lo < hi) {
        return Err(Error::Domain("find_peak requires lo < hi"));
    }
    let m = golden_section_max(|d| reward(d, s), lo, hi, PEAK_TOLERANCE)?;
    Ok(Peak {
        d_star: m.x,
        r_max: reward(m.x, s)?,
    })
}

/// Closed-form cutoff that yields exactly one half at `half_d` and one tenth
/// at `tenth_d`, assuming the base curve is flat across the decline.
pub fn calibrate_cutoff(half_d: f64, tenth_d: f64) -> Result<CutoffParams> {
    if !(half_d > 0.0) {
        return Err(Error::Ordering("half_d must be positive"));
    }
    if !(half_d < tenth_d) {
        return Err(Error::Ordering("half_d must be below tenth_d"));
    }
    CutoffParams::new(half_d, (tenth_d - half_d) / LN_9)
}

/// The three reference points of a schedule plus its target maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Landmarks {
    /// Difficulty of the maximum reward.
    pub peak_d: f64,
    /// Difficulty at which the reward has fallen to half the maximum.
    pub half_d: f64,
    /// Difficulty at which the reward has fallen to a tenth of the maximum.
    pub tenth_d: f64,
    /// Maximum reward.
    pub r_max: f64,
}

impl Landmarks {
    pub fn calibrate(&self) -> Result<RewardScheduleParams> {
        calibrate_schedule(self.peak_d, self.half_d, self.tenth_d, self.r_max)
    }
}

/// Fits a cut-off schedule to the three landmarks with `b = 4a`.
pub fn calibrate_schedule(
    peak_d: f64,
    half_d: f64,
    tenth_d: f64,
    r_max_target: f64,
) -> Result<RewardScheduleParams> {
    calibrate_schedule_with(peak_d, half_d, tenth_d, r_max_target, DEFAULT_SHAPE_RATIO)
}

/// [`calibrate_schedule`] with a caller-chosen `b / a` ratio.
///
/// The cutoff comes from [`calibrate_cutoff`]. The single free shape
/// parameter `a` is then solved so that the composed maximum lands on
/// `peak_d`, and finally `scale` is set so that the maximum equals
/// `r_max_target`.
pub fn calibrate_schedule_with(
    peak_d: f64,
    half_d: f64,
    tenth_d: f64,
    r_max_target: f64,
    shape_ratio: f64,
) -> Result<RewardScheduleParams> {
    if !(peak_d > 0.0) {
        return Err(Error::Ordering("peak_d must be positive"));
    }
    if !(peak_d < half_d) {
        return Err(Error::Ordering("peak_d must be below half_d"));
    }
    if !(r_max_target > 0.0 && r_max_target.is_finite()) {
        return Err(Error::InvalidParam {
            field: "r_max",
            reason: "must be positive and finite",
        });
    }
    if !(shape_ratio > 1.0 && shape_ratio.is_finite()) {
        return Err(Error::InvalidParam {
            field: "shape_ratio",
            reason: "must be finite and greater than 1",
        });
    }
    let cutoff = calibrate_cutoff(half_d, tenth_d)?;
    let hi = cutoff.d_co + 40.0 * cutoff.spread;

    let composed = |a: f64| -> Result<RewardScheduleParams> {
        Ok(RewardScheduleParams {
            base: BaseCurveParams::new(a, shape_ratio * a, 1.0)?,
            cutoff: Some(cutoff),
        })
    };
    // Decreasing in `a`: a steeper base curve pulls the maximum left.
    let residual =
        |a: f64| -> Result<f64> { Ok(find_peak(&composed(a)?, 0.0, hi)?.d_star - peak_d) };

    let a0 = 1.0 / peak_d;
    let r0 = residual(a0)?;
    let (mut lo_a, mut hi_a) = (a0, a0);
    let (mut lo_r, mut hi_r) = (r0, r0);
    for _ in 0..100 {
        if lo_r > 0.0 && hi_r < 0.0 {
            break;
        }
        if lo_r <= 0.0 {
            lo_a *= 0.5;
            lo_r = residual(lo_a)?;
        }
        if hi_r >= 0.0 {
            hi_a *= 2.0;
            hi_r = residual(hi_a)?;
        }
    }
    if !(lo_r > 0.0 && hi_r < 0.0) {
        return Err(Error::Calibration {
            lo_a,
            lo_residual: lo_r,
            hi_a,
            hi_residual: hi_r,
        });
    }

    let a = bisect(residual, lo_a, hi_a, CALIBRATION_TOLERANCE)?;
    let unit = composed(a)?;
    let peak = find_peak(&unit, 0.0, hi)?;
    let base = unit.base.with_scale(r_max_target / peak.r_max)?;
    RewardScheduleParams::new(base, Some(cutoff))
}
