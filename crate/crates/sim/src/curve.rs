//! Tabulating a reward schedule over a difficulty range.

use pom_core::reward::{base_reward, cutoff_factor, find_peak, reward, Peak, RewardScheduleParams};

use crate::error::{Result, RunError};

pub const CURVE_COLUMNS: [&str; 4] = ["d", "base", "cutoff_factor", "reward"];

/// Grid `lo, lo + step, ...` up to `hi`. A step wider than the range gives
/// the single point `lo`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(RunError::Usage(format!(
            "--range needs 0 <= lo < hi, got {lo},{hi}"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(RunError::Usage(format!(
            "--step must be positive, got {step}"
        )));
    }
    let n = ((hi - lo) / step * (1.0 + 1e-12)).floor() as usize + 1;
    if n > 10_000_000 {
        return Err(RunError::Usage(format!(
            "--range/--step would give {n} rows"
        )));
    }
    Ok((0..n).map(|i| lo + step * i as f64).collect())
}

pub fn curve_csv(s: &RewardScheduleParams, points: &[f64]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CURVE_COLUMNS).expect("in-memory write");
    for &d in points {
        let base = base_reward(d, s.base()).expect("grid is nonnegative");
        let f = s.cutoff().map_or(1.0, |c| cutoff_factor(d, c));
        let r = reward(d, s).expect("grid is nonnegative");
        w.serialize((d, base, f, r)).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

pub fn schedule_peak(s: &RewardScheduleParams) -> pom_core::Result<Peak> {
    let hi = match s.cutoff() {
        Some(c) => c.d_co() + 40.0 * c.spread(),
        None => 40.0 / s.base().a(),
    };
    find_peak(s, 0.0, hi)
}

/// Landmark check: the located maximum and the reward ratios at the half and
/// tenth points.
pub fn landmark_table(
    s: &RewardScheduleParams,
    half_d: f64,
    tenth_d: f64,
) -> pom_core::Result<String> {
    let peak = schedule_peak(s)?;
    let ratio = |d: f64| reward(d, s).map(|r| r / peak.r_max);
    let rows = [
        ("I", peak.d_star, 1.0, 1.0),
        ("II", half_d, ratio(half_d)?, 0.5),
        ("III", tenth_d, ratio(tenth_d)?, 0.1),
    ];
    let mut out = format!(
        "{:<9}{:>12}{:>14}{:>10}\n",
        "landmark", "d", "R/R_max", "target"
    );
    for (name, d, r, t) in rows {
        out.push_str(&format!("{name:<9}{d:>12.6}{r:>14.6}{t:>10.2}\n"));
    }
    out.push_str(&format!("R_max = {:.12}\n", peak.r_max));
    Ok(out)
}
