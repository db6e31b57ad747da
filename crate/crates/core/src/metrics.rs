//! Concentration and equilibrium observables of a run.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::agents::MinerAgent;
use crate::simulator::{BlockRecord, RunSeries};
use crate::{Error, Result};

/// Fraction of active hashrate held by active miners strictly above
/// `threshold` MH/s; zero for an empty network.
pub fn large_miner_share<'a, I>(miners: I, threshold: f64) -> f64
where
    I: IntoIterator<Item = &'a MinerAgent>,
{
    let (mut large, mut total) = (0.0, 0.0);
    for m in miners.into_iter().filter(|m| m.active) {
        total += m.hashrate;
        if m.hashrate > threshold {
            large += m.hashrate;
        }
    }
    if total > 0.0 {
        large / total
    } else {
        0.0
    }
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
}

impl Moments {
    pub fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count();
        if n == 0 {
            return Self { mean: 0.0, sd: 0.0 };
        }
        let n = n as f64;
        let mean = values.clone().sum::<f64>() / n;
        let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self {
            mean,
            sd: libm::sqrt(var),
        }
    }
}

/// Post-burn-in averages of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    pub burn_in: u64,
    pub blocks: u64,
    /// MH/s.
    pub hashrate: Moments,
    /// Seconds between blocks.
    pub interval: Moments,
    pub large_miner_share: Moments,
    pub difficulty: Moments,
    pub raw_reward: Moments,
}

/// Block intervals, taking the genesis timestamp as zero.
pub fn intervals(records: &[BlockRecord]) -> impl Iterator<Item = f64> + Clone + '_ {
    let prev = core::iter::once(0.0).chain(records.iter().map(|r| r.timestamp));
    records.iter().zip(prev).map(|(r, p)| r.timestamp - p)
}

pub fn equilibrium_summary(series: &RunSeries, burn_in: u64) -> Result<EquilibriumSummary> {
    summarize_records(&series.records, burn_in)
}

pub fn summarize_records(records: &[BlockRecord], burn_in: u64) -> Result<EquilibriumSummary> {
    let len = records.len() as u64;
    if burn_in >= len {
        return Err(Error::Domain("burn-in must be shorter than the series"));
    }
    let skip = burn_in as usize;
    let tail = &records[skip..];
    Ok(EquilibriumSummary {
        burn_in,
        blocks: tail.len() as u64,
        hashrate: Moments::of(tail.iter().map(|r| r.total_hash)),
        interval: Moments::of(intervals(records).skip(skip)),
        large_miner_share: Moments::of(tail.iter().map(|r| r.large_miner_share)),
        difficulty: Moments::of(tail.iter().map(|r| r.difficulty)),
        raw_reward: Moments::of(tail.iter().map(|r| r.raw_reward)),
    })
}

/// Treatment-minus-baseline differences of two equilibrium summaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub delta_hashrate: f64,
    pub delta_share: f64,
    pub delta_interval: f64,
    pub delta_reward: f64,
    /// Treatment over baseline mean hashrate.
    pub hashrate_ratio: f64,
    /// Treatment over baseline mean large-miner share.
    pub share_ratio: f64,
}

impl Comparison {
    pub fn between(baseline: &EquilibriumSummary, treatment: &EquilibriumSummary) -> Self {
        Self {
            delta_hashrate: treatment.hashrate.mean - baseline.hashrate.mean,
            delta_share: treatment.large_miner_share.mean - baseline.large_miner_share.mean,
            delta_interval: treatment.interval.mean - baseline.interval.mean,
            delta_reward: treatment.raw_reward.mean - baseline.raw_reward.mean,
            hashrate_ratio: treatment.hashrate.mean / baseline.hashrate.mean,
            share_ratio: treatment.large_miner_share.mean / baseline.large_miner_share.mean,
        }
    }
}

/// Paired comparison of two runs of the same length.
pub fn compare(baseline: &RunSeries, treatment: &RunSeries, burn_in: u64) -> Result<Comparison> {
    compare_records(&baseline.records, &treatment.records, burn_in)
}

/// [`compare`] on bare block records.
pub fn compare_records(
    baseline: &[BlockRecord],
    treatment: &[BlockRecord],
    burn_in: u64,
) -> Result<Comparison> {
    if baseline.len() != treatment.len() {
        return Err(Error::Domain("compared runs must have equal horizons"));
    }
    Ok(Comparison::between(
        &summarize_records(baseline, burn_in)?,
        &summarize_records(treatment, burn_in)?,
    ))
}

/// Median of a slice (mean of the middle pair for even lengths); `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    })
}
