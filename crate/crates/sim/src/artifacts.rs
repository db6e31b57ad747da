//! On-disk artifacts: per-block CSV, agent CSV, JSON summaries and schedule
//! parameter files.

use std::fs;
use std::io::Write;
use std::path::Path;

use pom_core::reward::RewardScheduleParams;
use pom_core::simulator::{BlockRecord, MinerOutcome, RunSeries, RunSummary};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RunError};

pub const BLOCK_COLUMNS: [&str; 10] = [
    "height",
    "timestamp",
    "difficulty",
    "total_hash",
    "winner",
    "raw_reward",
    "pom_multiplier",
    "credited_reward",
    "active_miner_count",
    "large_miner_share",
];

pub const AGENT_COLUMNS: [&str; 7] = [
    "id",
    "hashrate",
    "unit_cost",
    "class",
    "blocks_won",
    "active_blocks",
    "credited_reward",
];

pub const BLOCKS_FILE: &str = "blocks.csv";
pub const AGENTS_FILE: &str = "agents.csv";
pub const SUMMARY_FILE: &str = "summary.json";

fn csv_error(path: &Path, e: csv::Error) -> RunError {
    RunError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn blocks_csv(records: &[BlockRecord]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(BLOCK_COLUMNS).expect("in-memory write");
    for r in records {
        w.serialize(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

pub fn agents_csv(miners: &[MinerOutcome]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(AGENT_COLUMNS).expect("in-memory write");
    for m in miners {
        w.serialize((
            m.id,
            m.hashrate,
            m.unit_cost,
            &m.class,
            m.blocks_won,
            m.active_blocks,
            m.credited_reward,
        ))
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

pub fn read_blocks_csv(path: &Path) -> Result<Vec<BlockRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(BLOCK_COLUMNS) {
        return Err(RunError::Format {
            path: path.to_path_buf(),
            message: format!("unexpected header, want {}", BLOCK_COLUMNS.join(",")),
        });
    }
    r.deserialize()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

/// Per-run JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config_digest: String,
    pub seed: u64,
    pub burn_in: u64,
    #[serde(flatten)]
    pub summary: RunSummary,
}

impl RunReport {
    pub fn new(series: &RunSeries, burn_in: u64) -> Self {
        Self {
            config_digest: series.config_digest.clone(),
            seed: series.seed,
            burn_in,
            summary: series.summary.clone(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("plain data serializes");
    out.push(b'\n');
    out
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| RunError::io(path, e))?;
    f.write_all(bytes).map_err(|e| RunError::io(path, e))
}

/// Writes `blocks.csv`, `agents.csv` and `summary.json` into `dir`.
pub fn write_run(dir: &Path, series: &RunSeries, burn_in: u64) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    write_file(&dir.join(BLOCKS_FILE), &blocks_csv(&series.records))?;
    write_file(&dir.join(AGENTS_FILE), &agents_csv(&series.miners))?;
    write_file(
        &dir.join(SUMMARY_FILE),
        &to_json(&RunReport::new(series, burn_in)),
    )
}

/// Schedule parameters as a JSON object with every number written to 17
/// significant digits.
pub fn schedule_json(s: &RewardScheduleParams) -> String {
    let b = s.base();
    let mut fields = vec![("a", b.a()), ("b", b.b()), ("scale", b.scale())];
    if let Some(c) = s.cutoff() {
        fields.push(("d_co", c.d_co()));
        fields.push(("spread", c.spread()));
    }
    let body: Vec<String> = fields
        .iter()
        .map(|(k, v)| format!("  \"{k}\": {v:.16e}"))
        .collect();
    format!("{{\n{}\n}}\n", body.join(",\n"))
}

pub fn parse_schedule(text: &str, origin: &Path) -> Result<RewardScheduleParams> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| RunError::Config {
        path: origin.to_path_buf(),
        message: e.into_inner().to_string(),
    })
}
