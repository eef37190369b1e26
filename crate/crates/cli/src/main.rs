//! `ensconv`: estimate how many classifiers a randomized voting ensemble
//! needs by bootstrapping its prediction array.
//!
//! Subcommands: `train` (bagged trees on a CSV dataset), `estimate`
//! (bootstrap sigma report from prediction-array files), `extrapolate`
//! (scale an estimate to other ensemble sizes), `simulate` (first-order
//! model studies). Every command writes a run manifest so results can be
//! replayed bit-exactly.
//!
//! Exit codes: 0 success, 2 usage error, 3 data/parse error, 4
//! numeric/domain error.

mod commands;
mod manifest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ensconv_core::CoreError;
use std::path::PathBuf;

/// Semver plus build hash, e.g. `0.1.0+1a2b3c4d5e6f`.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("ENSCONV_BUILD_HASH"));

pub fn version_string() -> String {
    VERSION.to_string()
}

/// An error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: 4, message: message.into() }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let code = match &err {
            CoreError::Parse { .. } | CoreError::Io(_) | CoreError::Dimension(_) => 3,
            CoreError::Config(_) => 2,
            CoreError::Domain(_) | CoreError::EmptyClass(_) => 4,
        };
        Self { code, message: err.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "ensconv", version = VERSION, about = "Algorithmic-variance estimation for randomized voting ensembles")]
struct Cli {
    /// Worker thread cap (also honored from ENSCONV_THREADS); never changes
    /// results, only wall-clock time.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Holdout,
    Oob,
}

#[derive(Subcommand)]
enum Command {
    /// Train a bagged tree ensemble on a CSV dataset and emit its
    /// prediction-array, truth, and out-of-bag mask files.
    Train(TrainArgs),
    /// Bootstrap a prediction array into a sigma report.
    Estimate(EstimateArgs),
    /// Scale a sigma estimate to another ensemble size, or find the
    /// smallest size meeting a tolerance.
    Extrapolate(ExtrapolateArgs),
    /// First-order model simulations.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset CSV: header row, last column is the integer class label.
    #[arg(long)]
    data: PathBuf,
    /// Number of trees.
    #[arg(long, default_value_t = 200)]
    trees: usize,
    /// Maximum tree depth.
    #[arg(long, default_value_t = 16)]
    depth: usize,
    /// Features considered per split (default: ceil(sqrt(p))).
    #[arg(long)]
    mtry: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of rows held out for hold-out evaluation; 0 emits only the
    /// out-of-bag outputs.
    #[arg(long, default_value_t = 0.2)]
    holdout_frac: f64,
    /// Output directory (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Prediction-array file.
    #[arg(long)]
    predictions: PathBuf,
    /// Truth-label file.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Holdout)]
    mode: Mode,
    /// Out-of-bag mask file (required in oob mode).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Bootstrap replicate count.
    #[arg(long = "B", default_value_t = 50)]
    b: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict the error rate to columns of this true class.
    #[arg(long)]
    class: Option<u32>,
    /// Probabilities for the centered quantiles.
    #[arg(long, default_value = "0.05,0.25,0.5,0.75,0.95", value_delimiter = ',')]
    quantiles: Vec<String>,
    /// Extra ensemble sizes to extrapolate the estimate to.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<usize>,
    /// Report path (JSON); a manifest is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExtrapolateArgs {
    /// Sigma estimate at size t0.
    #[arg(long)]
    sigma0: f64,
    #[arg(long)]
    t0: usize,
    /// Target ensemble size.
    #[arg(long)]
    t: Option<usize>,
    /// Tolerance for the 3-sigma stopping rule.
    #[arg(long)]
    eps: Option<f64>,
    /// Output path (JSON); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model spec JSON: {k, pi, mu: [{family, params}]}.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
    #[command(subcommand)]
    what: SimulateCommand,
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Exact per-run error curves: CSV rows (run, t, err_t) for every
    /// prefix size.
    Paths {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n_runs: usize,
    },
    /// Ground-truth sigma curve over ensemble sizes 1..=t.
    Sigma {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n_runs: usize,
        /// Diagnostic: force every run onto the same substream (sigma
        /// collapses to zero).
        #[arg(long)]
        equal_run_seeds: bool,
    },
    /// Distribution of sqrt(t) * (Err_t - err_inf) with normality
    /// diagnostics.
    Clt {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n_runs: usize,
    },
    /// Mean bootstrap sigma over independent ensembles against the
    /// ground-truth sigma.
    BootstrapCheck {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n_runs: usize,
        #[arg(long = "B", default_value_t = 50)]
        b: usize,
    },
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let from_env = std::env::var("ENSCONV_THREADS")
        .ok()
        .map(|v| {
            v.parse::<usize>()
                .map_err(|_| CliError::usage(format!("ENSCONV_THREADS must be an integer, got `{v}`")))
        })
        .transpose()?;
    if let Some(n) = flag.or(from_env) {
        if n == 0 {
            return Err(CliError::usage("thread count must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Train(args) => commands::train(&args),
        Command::Estimate(args) => commands::estimate(&args),
        Command::Extrapolate(args) => commands::extrapolate(&args),
        Command::Simulate(args) => commands::simulate(&args),
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {}", err.message);
        std::process::exit(err.code);
    }
}
