//! Seed sweeps and their on-disk layout.

use std::path::{Path, PathBuf};

use pom_core::config::SimConfig;
use pom_core::metrics::{median, EquilibriumSummary};
use pom_core::simulator::{run, GenesisSummary, RunSeries};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::{to_json, write_file, write_run};
use crate::error::{Result, RunError};

pub const AGGREGATE_FILE: &str = "aggregate.json";
pub const THREADS_ENV: &str = "POM_SIM_THREADS";

pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}"))
}

/// Thread cap from the environment, if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(RunError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Runs `seeds` consecutive seeds starting at `base_seed`, in seed order.
pub fn run_seeds(
    config: &SimConfig,
    base_seed: u64,
    seeds: u64,
    threads: Option<usize>,
) -> Result<Vec<RunSeries>> {
    let job = || {
        (0..seeds)
            .into_par_iter()
            .map(|i| {
                let seed = base_seed + i;
                let mut c = config.clone();
                c.seed = seed;
                run(&c).map_err(|source| RunError::Simulation { seed, source })
            })
            .collect::<Result<Vec<_>>>()
    };
    match threads {
        None => job(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Usage(e.to_string()))?
            .install(job),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub config_digest: String,
    pub genesis: GenesisSummary,
    pub equilibrium: Option<EquilibriumSummary>,
    pub stall_quanta: u64,
}

/// Medians across seeds of the equilibrium means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medians {
    pub hashrate: f64,
    pub large_miner_share: f64,
    pub interval: f64,
    pub difficulty: f64,
    pub raw_reward: f64,
    pub initial_hashrate: f64,
    pub initial_large_miner_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub base_seed: u64,
    pub seeds: u64,
    pub horizon: u64,
    pub burn_in: u64,
    pub large_miner_threshold: f64,
    /// `None` when the runs have no blocks.
    pub median: Option<Medians>,
    /// Seeds whose equilibrium large-miner share ended below the genesis share.
    pub share_decreased: u64,
    pub runs: Vec<SeedResult>,
}

pub fn aggregate(config: &SimConfig, base_seed: u64, series: &[RunSeries]) -> Aggregate {
    let runs: Vec<SeedResult> = series
        .iter()
        .map(|s| SeedResult {
            seed: s.seed,
            config_digest: s.config_digest.clone(),
            genesis: s.summary.genesis,
            equilibrium: s.summary.equilibrium,
            stall_quanta: s.summary.stall_quanta,
        })
        .collect();
    let eq: Vec<(GenesisSummary, EquilibriumSummary)> = runs
        .iter()
        .filter_map(|r| r.equilibrium.map(|e| (r.genesis, e)))
        .collect();
    let med = |f: &dyn Fn(&(GenesisSummary, EquilibriumSummary)) -> f64| {
        median(&eq.iter().map(f).collect::<Vec<_>>())
    };
    let median = med(&|x| x.1.hashrate.mean).map(|hashrate| Medians {
        hashrate,
        large_miner_share: med(&|x| x.1.large_miner_share.mean).unwrap_or(0.0),
        interval: med(&|x| x.1.interval.mean).unwrap_or(0.0),
        difficulty: med(&|x| x.1.difficulty.mean).unwrap_or(0.0),
        raw_reward: med(&|x| x.1.raw_reward.mean).unwrap_or(0.0),
        initial_hashrate: med(&|x| x.0.hashrate).unwrap_or(0.0),
        initial_large_miner_share: med(&|x| x.0.large_miner_share).unwrap_or(0.0),
    });
    let share_decreased = eq
        .iter()
        .filter(|(g, e)| e.large_miner_share.mean < g.large_miner_share)
        .count() as u64;
    Aggregate {
        base_seed,
        seeds: series.len() as u64,
        horizon: config.horizon,
        burn_in: config.burn_in(),
        large_miner_threshold: config.large_miner_threshold,
        median,
        share_decreased,
        runs,
    }
}

/// Runs the sweep and writes `seed-<n>/` directories plus `aggregate.json`.
pub fn sweep_to_dir(
    config: &SimConfig,
    base_seed: u64,
    seeds: u64,
    out: &Path,
    threads: Option<usize>,
) -> Result<Aggregate> {
    if seeds == 0 {
        return Err(RunError::Usage("at least one seed is required".into()));
    }
    let series = run_seeds(config, base_seed, seeds, threads)?;
    std::fs::create_dir_all(out).map_err(|e| RunError::io(out, e))?;
    for s in &series {
        write_run(&seed_dir(out, s.seed), s, config.burn_in())?;
    }
    let agg = aggregate(config, base_seed, &series);
    write_file(&out.join(AGGREGATE_FILE), &to_json(&agg))?;
    Ok(agg)
}
