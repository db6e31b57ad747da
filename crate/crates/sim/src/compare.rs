//! Paired comparison of two sweep directories.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use pom_core::metrics::{compare_records, median, Comparison};

use crate::artifacts::{read_blocks_csv, BLOCKS_FILE};
use crate::error::{Result, RunError};
use crate::sweep::seed_dir;

pub const COMPARISON_COLUMNS: [&str; 7] = [
    "seed",
    "delta_hashrate",
    "delta_share",
    "delta_interval",
    "delta_reward",
    "hashrate_ratio",
    "share_ratio",
];

/// Seeds that have a `seed-<n>/blocks.csv` under `dir`.
pub fn seeds_in(dir: &Path) -> Result<BTreeSet<u64>> {
    let entries = fs::read_dir(dir).map_err(|e| RunError::Config {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut seeds = BTreeSet::new();
    for entry in entries {
        let entry = entry.map_err(|e| RunError::io(dir, e))?;
        let name = entry.file_name();
        let Some(seed) = name
            .to_str()
            .and_then(|n| n.strip_prefix("seed-"))
            .and_then(|n| n.parse().ok())
        else {
            continue;
        };
        if entry.path().join(BLOCKS_FILE).is_file() {
            seeds.insert(seed);
        }
    }
    Ok(seeds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<(u64, Comparison)>,
    pub median: Comparison,
}

/// Treatment-minus-baseline deltas per seed. `burn_in` defaults to a fifth
/// of each run.
pub fn compare_dirs(
    baseline: &Path,
    treatment: &Path,
    burn_in: Option<u64>,
) -> Result<ComparisonTable> {
    let a = seeds_in(baseline)?;
    let b = seeds_in(treatment)?;
    let mut missing: Vec<String> = Vec::new();
    for s in a.difference(&b) {
        missing.push(
            seed_dir(treatment, *s)
                .join(BLOCKS_FILE)
                .display()
                .to_string(),
        );
    }
    for s in b.difference(&a) {
        missing.push(
            seed_dir(baseline, *s)
                .join(BLOCKS_FILE)
                .display()
                .to_string(),
        );
    }
    if !missing.is_empty() {
        return Err(RunError::MissingSeeds(missing));
    }
    if a.is_empty() {
        return Err(RunError::Usage(format!(
            "no seed-<n>/{BLOCKS_FILE} runs under {}",
            baseline.display()
        )));
    }

    let mut rows = Vec::with_capacity(a.len());
    for &seed in &a {
        let x = read_blocks_csv(&seed_dir(baseline, seed).join(BLOCKS_FILE))?;
        let y = read_blocks_csv(&seed_dir(treatment, seed).join(BLOCKS_FILE))?;
        let burn = burn_in.unwrap_or(x.len() as u64 / 5);
        let c = compare_records(&x, &y, burn).map_err(|e| RunError::Config {
            path: seed_dir(treatment, seed),
            message: e.to_string(),
        })?;
        rows.push((seed, c));
    }
    let med =
        |f: fn(&Comparison) -> f64| median(&rows.iter().map(|(_, c)| f(c)).collect::<Vec<_>>());
    let median = Comparison {
        delta_hashrate: med(|c| c.delta_hashrate).unwrap_or(0.0),
        delta_share: med(|c| c.delta_share).unwrap_or(0.0),
        delta_interval: med(|c| c.delta_interval).unwrap_or(0.0),
        delta_reward: med(|c| c.delta_reward).unwrap_or(0.0),
        hashrate_ratio: med(|c| c.hashrate_ratio).unwrap_or(0.0),
        share_ratio: med(|c| c.share_ratio).unwrap_or(0.0),
    };
    Ok(ComparisonTable { rows, median })
}

impl ComparisonTable {
    /// One row per seed, then a `median` row.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        w.write_record(COMPARISON_COLUMNS).expect("in-memory write");
        let mut row = |label: String, c: &Comparison| {
            w.serialize((
                label,
                c.delta_hashrate,
                c.delta_share,
                c.delta_interval,
                c.delta_reward,
                c.hashrate_ratio,
                c.share_ratio,
            ))
            .expect("in-memory write");
        };
        for (seed, c) in &self.rows {
            row(seed.to_string(), c);
        }
        row("median".into(), &self.median);
        w.into_inner().expect("in-memory write")
    }
}
