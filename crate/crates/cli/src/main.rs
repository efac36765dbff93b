//! `endovol`: simulate designs, estimate on tick files, run Monte Carlo
//! benchmarks and summarize estimator distributions.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric or
//! estimator error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CliError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "endovol", version, about = "Integrated volatility under endogenous sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate paths of a design and write one tick file per path plus a manifest.
    Simulate,
    /// Run estimators on a tick file.
    Estimate {
        /// Tick file with header `time,price`.
        input: PathBuf,
    },
    /// Monte Carlo benchmark: metrics, per-path estimates and manifest.
    Benchmark,
    /// Distribution summary (histogram, QQ, moments) from a per-path file.
    Report {
        /// `per_path.csv` written by `benchmark`.
        input: PathBuf,
    },
}

/// Flags shared by all subcommands. Unset flags fall back to the config
/// file, then to the defaults.
#[derive(Debug, Default, Args)]
pub struct SharedArgs {
    /// Key-value file (`key = value` per line) supplying defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for per-path streams [default: 1].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, or output file for `estimate`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Local-averaging window.
    #[arg(long, global = true)]
    pub p: Option<usize>,
    /// Sub-grid count.
    #[arg(long, global = true)]
    pub q: Option<usize>,
    /// Block-length constant of the bias correction.
    #[arg(long, global = true)]
    pub d1: Option<usize>,
    /// Nominal sample size: the design's `n`, or the plan's `n` for `estimate`.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Fine simulation steps per nominal observation interval [default: 20].
    #[arg(long, global = true)]
    pub fine_factor: Option<usize>,
    /// Bridge refinement depth for barrier crossings; 0 uses the fine grid only.
    #[arg(long, global = true)]
    pub crossing_depth: Option<u32>,
    /// Standard deviation of the additive noise [default: 0.0005].
    #[arg(long, global = true)]
    pub noise_sd: Option<f64>,
    /// Number of paths [default: 1 for simulate, 1000 for benchmark].
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// bb-hit, heston-hit or bb-poisson.
    #[arg(long, global = true)]
    pub design: Option<String>,
    /// Comma-separated estimator keys, `table` or `all`.
    #[arg(long, global = true)]
    pub estimators: Option<String>,
    /// Worker threads; also read from ENDOVOL_WORKERS.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.shared)?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Estimate { input } => commands::estimate(&cfg, &input),
        Command::Benchmark => commands::benchmark(&cfg),
        Command::Report { input } => commands::report(&cfg, &input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
