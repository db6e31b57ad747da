use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pom_core::reward::{calibrate_schedule, RewardScheduleParams};
use pom_sim::artifacts::{parse_schedule, schedule_json, write_file};
use pom_sim::compare::compare_dirs;
use pom_sim::config::load_config;
use pom_sim::curve::{curve_csv, grid, landmark_table};
use pom_sim::sweep::{sweep_to_dir, threads_from_env};
use pom_sim::{Result, RunError};

/// Reward schedule tables and seeded network simulations.
#[derive(Parser)]
#[command(name = "pom-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a reward schedule as CSV (d, base, cutoff_factor, reward).
    Curve(CurveArgs),
    /// Run a seed sweep and write per-seed artifacts plus aggregate.json.
    Run(RunArgs),
    /// Paired per-seed deltas of two sweep directories.
    Compare(CompareArgs),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["landmarks", "schedule"])))]
struct CurveArgs {
    /// Landmark difficulties PEAK,HALF,TENTH; also prints the landmark check.
    #[arg(long, value_delimiter = ',', value_name = "PEAK,HALF,TENTH")]
    landmarks: Option<Vec<f64>>,
    /// Maximum reward used with --landmarks.
    #[arg(long, default_value_t = 1.0)]
    r_max: f64,
    /// JSON file with keys a, b, scale and optionally d_co, spread.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Difficulty range LO,HI.
    #[arg(long, value_delimiter = ',', value_name = "LO,HI", default_values_t = [0.0, 4.0])]
    range: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the schedule parameters as JSON.
    #[arg(long)]
    save_schedule: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Number of consecutive seeds.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    seeds: u64,
    /// First seed; defaults to the config's seed.
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Large-miner threshold in MH/s, overriding the config.
    #[arg(long)]
    threshold: Option<f64>,
    /// Blocks excluded from equilibrium summaries, overriding the config.
    #[arg(long)]
    burn_in: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    baseline: PathBuf,
    treatment: PathBuf,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to a fifth of each run.
    #[arg(long)]
    burn_in: Option<u64>,
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| RunError::io("<stdout>", e)),
    }
}

fn usage(e: pom_core::Error) -> RunError {
    RunError::Usage(e.to_string())
}

fn curve(args: CurveArgs) -> Result<()> {
    if args.range.len() != 2 {
        return Err(RunError::Usage("--range takes LO,HI".into()));
    }
    if args.landmarks.as_ref().is_some_and(|l| l.len() != 3) {
        return Err(RunError::Usage("--landmarks takes PEAK,HALF,TENTH".into()));
    }
    let points = grid(args.range[0], args.range[1], args.step)?;
    let (schedule, landmarks): (RewardScheduleParams, _) = match (&args.landmarks, &args.schedule) {
        (Some(l), _) => (
            calibrate_schedule(l[0], l[1], l[2], args.r_max).map_err(usage)?,
            Some((l[1], l[2])),
        ),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::Config {
                path: path.clone(),
                message: e.to_string(),
            })?;
            (parse_schedule(&text, path)?, None)
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    emit(args.out.as_deref(), &curve_csv(&schedule, &points))?;
    if let Some(p) = &args.save_schedule {
        write_file(p, schedule_json(&schedule).as_bytes())?;
    }
    if let Some((half, tenth)) = landmarks {
        let table = landmark_table(&schedule, half, tenth).map_err(usage)?;
        if args.out.is_some() {
            print!("{table}");
        } else {
            eprint!("{table}");
        }
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = load_config(&args.config)?;
    if let Some(t) = args.threshold {
        config.large_miner_threshold = t;
    }
    if let Some(b) = args.burn_in {
        config.burn_in = Some(b);
    }
    let issues = config.issues();
    if !issues.is_empty() {
        let lines: Vec<String> = issues.iter().map(ToString::to_string).collect();
        return Err(RunError::Config {
            path: args.config,
            message: lines.join("; "),
        });
    }
    let base_seed = args.base_seed.unwrap_or(config.seed);
    let agg = sweep_to_dir(
        &config,
        base_seed,
        args.seeds,
        &args.out,
        threads_from_env()?,
    )?;
    if let Some(m) = agg.median {
        println!(
            "{} seeds: median hashrate {:.3} MH/s, large-miner share {:.4} (genesis {:.4}), interval {:.2} s",
            agg.seeds, m.hashrate, m.large_miner_share, m.initial_large_miner_share, m.interval
        );
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let table = compare_dirs(&args.baseline, &args.treatment, args.burn_in)?;
    emit(args.out.as_deref(), &table.to_csv())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Curve(a) => curve(a),
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pom-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
