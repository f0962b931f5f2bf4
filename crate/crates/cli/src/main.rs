//! `clda`: fit, evaluate and stress-test capped-norm LDA from the shell.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clda::eval::Method;
use clda::NoiseSpec;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "clda", version, about = "Capped l2,1-norm LDA experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn a projection from a labelled CSV.
    Fit(FitArgs),
    /// Repeated k-fold cross-validation with 1-NN on the projection.
    Eval(EvalArgs),
    /// Two-strip synthetic experiment with outliers.
    Artificial(ArtificialArgs),
    /// Add Gaussian noise to a CSV.
    Noise(NoiseArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Lda,
    Clda,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lda => Method::Lda,
            MethodArg::Clda => Method::Clda,
        }
    }
}

#[derive(Args, Debug)]
struct InputArgs {
    /// CSV with a header row, one sample per row.
    #[arg(long)]
    input: PathBuf,
    /// Label column by header name or 0-based index (default: last column).
    #[arg(long)]
    label_col: Option<String>,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Diagonal loading as a fraction of the mean scatter diagonal.
    #[arg(long, default_value_t = 1e-8)]
    ridge: f64,
}

impl SolverArgs {
    fn options(&self) -> clda::eval::SolverOptions {
        clda::eval::SolverOptions {
            max_iter: self.max_iter,
            tol: self.tol,
            ridge: clda::Ridge::Relative(self.ridge),
            ..Default::default()
        }
    }
}

/// Optional pollution of training data; all three flags go together.
#[derive(Args, Debug)]
struct NoiseFlags {
    /// Fraction of features polluted in each chosen sample.
    #[arg(long)]
    noise_features: Option<f64>,
    /// Fraction of samples polluted.
    #[arg(long)]
    noise_samples: Option<f64>,
    #[arg(long)]
    noise_variance: Option<f64>,
}

impl NoiseFlags {
    fn spec(&self, seed: u64) -> Result<Option<NoiseSpec>, CliError> {
        match (self.noise_features, self.noise_samples, self.noise_variance) {
            (None, None, None) => Ok(None),
            (Some(f), Some(s), Some(v)) => Ok(Some(NoiseSpec::new(f, s, v, seed)?)),
            _ => Err(CliError::Invalid(
                "--noise-features, --noise-samples and --noise-variance must be given together"
                    .into(),
            )),
        }
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long, value_enum, default_value = "clda")]
    method: MethodArg,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Fixed cap on projected residual norms.
    #[arg(long, conflicts_with = "epsilon_quantile")]
    epsilon: Option<f64>,
    /// Cap as a quantile of the initial projected within-class norms.
    #[arg(long)]
    epsilon_quantile: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Rescale features to [0, 1] before fitting.
    #[arg(long)]
    normalize: bool,
    /// Projection matrix, one row per feature.
    #[arg(long)]
    out: PathBuf,
    /// Objective value per iteration.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_enum, default_value = "clda")]
    method: MethodArg,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target dimensions to search, e.g. `1,2,3`.
    #[arg(long, value_delimiter = ',')]
    d_grid: Option<Vec<usize>>,
    /// Epsilon quantiles to search.
    #[arg(long, value_delimiter = ',')]
    quantiles: Option<Vec<f64>>,
    /// Fixed epsilon values to search instead of quantiles.
    #[arg(long, value_delimiter = ',', conflicts_with = "quantiles")]
    epsilons: Option<Vec<f64>>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Skip the per-fold [0, 1] rescaling.
    #[arg(long)]
    no_normalize: bool,
    #[command(flatten)]
    noise: NoiseFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ArtificialArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent datasets to generate.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0.9)]
    epsilon_quantile: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    noise: NoiseFlags,
    /// Directory for results.csv, points.csv and directions.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.3)]
    feature_fraction: f64,
    #[arg(long, default_value_t = 0.1)]
    sample_fraction: f64,
    #[arg(long, default_value_t = 0.05)]
    variance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CLDA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid(format!("CLDA_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Invalid(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Eval(a) => commands::eval(a),
        Command::Artificial(a) => commands::artificial(a),
        Command::Noise(a) => commands::noise(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
