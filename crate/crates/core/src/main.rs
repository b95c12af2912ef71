use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use auction_lab::cli::{
    check_hr, emit_report, parse_scenario_with_seed, plan_scenario, ratio_scenario, run_experiment, simulate_scenario,
    ExperimentOptions, ExperimentReport, Format, ScenarioConfig, BUILTIN_EXPERIMENTS,
};
use auction_lab::{Error, Result};

#[derive(Parser)]
#[command(name = "auction-lab", version, about = "Revenue approximation experiments for mixture-of-regular auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Master seed; overrides the scenario file. AUCTION_LAB_SEED is the fallback.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Number of independent random streams.
    #[arg(long, global = true)]
    streams: Option<u64>,
    /// Finite price used when a monopoly price is unattained.
    #[arg(long, global = true, default_value_t = auction_lab::cli::experiments::DEFAULT_HORIZON)]
    horizon: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv, json-lines or text-table.
    #[arg(long, global = true)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the revenue of a scenario's mechanism.
    Simulate { scenario: PathBuf },
    /// List the applicable augmentation recipes with guarantees and evidence.
    Plan { scenario: PathBuf },
    /// Pairwise hazard-rate dominance among the market's components.
    CheckHr { scenario: PathBuf },
    /// Benchmark-to-mechanism ratio, checked against the matching guarantee.
    Ratio { scenario: PathBuf },
    /// Run a built-in experiment, or `all`.
    Reproduce { name: String },
}

const SEED_ENV: &str = "AUCTION_LAB_SEED";

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Schema { path: SEED_ENV.into(), reason: format!("`{s}` is not an unsigned integer") }),
        Err(_) => Ok(None),
    }
}

fn load(path: &PathBuf, common: &Common) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    let fallback = match common.seed {
        Some(s) => Some(s),
        None => env_seed()?,
    };
    let mut cfg = parse_scenario_with_seed(&text, fallback)?;
    if let Some(seed) = common.seed {
        cfg.estimator.seed = seed;
    }
    if let Some(n) = common.samples {
        cfg.estimator.n_samples = n;
    }
    if let Some(s) = common.streams {
        cfg.estimator.n_streams = s;
    }
    cfg.estimator.validate()?;
    Ok(cfg)
}

fn write_out(bytes: &[u8], out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

/// Emits a report and, if the scenario asks for it, a csv copy.
fn finish(report: &ExperimentReport, common: &Common, csv_path: Option<&str>) -> Result<bool> {
    let format = common.format.unwrap_or(Format::TextTable);
    write_out(&emit_report(report, format)?, common.out.as_ref())?;
    if let Some(path) = csv_path {
        std::fs::write(path, emit_report(report, Format::Csv)?)?;
    }
    Ok(report.all_pass())
}

fn run(cli: &Cli) -> Result<bool> {
    let common = &cli.common;
    match &cli.command {
        Command::Simulate { scenario } => {
            let cfg = load(scenario, common)?;
            finish(&simulate_scenario(&cfg)?, common, cfg.outputs.csv.as_deref())
        }
        Command::Ratio { scenario } => {
            let cfg = load(scenario, common)?;
            finish(&ratio_scenario(&cfg)?, common, cfg.outputs.csv.as_deref())
        }
        Command::Plan { scenario } => {
            let cfg = load(scenario, common)?;
            let (plans, report) = plan_scenario(&cfg)?;
            match common.format {
                None => {
                    let mut bytes = serde_json::to_vec_pretty(&plans).map_err(|e| Error::Io(e.to_string()))?;
                    bytes.push(b'\n');
                    write_out(&bytes, common.out.as_ref())?;
                    if let Some(path) = cfg.outputs.csv.as_deref() {
                        std::fs::write(path, emit_report(&report, Format::Csv)?)?;
                    }
                    Ok(report.all_pass())
                }
                Some(_) => finish(&report, common, cfg.outputs.csv.as_deref()),
            }
        }
        Command::CheckHr { scenario } => {
            let cfg = load(scenario, common)?;
            let (pairs, dominant) = check_hr(&cfg.market)?;
            let record = serde_json::json!({
                "scenario_id": cfg.id,
                "pairs": pairs,
                "dominant_component": dominant,
            });
            let mut bytes = serde_json::to_vec_pretty(&record).map_err(|e| Error::Io(e.to_string()))?;
            bytes.push(b'\n');
            write_out(&bytes, common.out.as_ref())?;
            Ok(true)
        }
        Command::Reproduce { name } => {
            let mut opts = ExperimentOptions {
                horizon: common.horizon,
                ..ExperimentOptions::default()
            };
            if let Some(seed) = common.seed.or(env_seed()?) {
                opts.seed = seed;
            }
            if let Some(n) = common.samples {
                opts.n_samples = n;
            }
            if let Some(s) = common.streams {
                opts.n_streams = s;
            }
            let names: Vec<&str> = if name == "all" {
                BUILTIN_EXPERIMENTS.to_vec()
            } else {
                vec![name.as_str()]
            };
            let mut report = ExperimentReport::new(name.clone());
            for n in names {
                report.extend(run_experiment(n, &opts)?);
            }
            finish(&report, common, None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    eprintln!("runtime: {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more bound checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
