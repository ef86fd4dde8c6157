use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod manifest;

use commands::UsageError;

/// Surface-to-volume regularized trees for imbalanced classification.
#[derive(Debug, Parser)]
#[command(name = "svrtree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grow a tree and write it as JSON.
    Fit(FitArgs),
    /// Label every row of a dataset with a saved model.
    Predict(PredictArgs),
    /// Repeated nested cross-validation over datasets and methods.
    Bench(BenchArgs),
    /// Surface, volume and SVR of a model's minority decision set.
    SvrInspect(InspectArgs),
    /// Write the synthetic rectangle example as CSV.
    Toy(ToyArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset spec (.toml) or a CSV / KEEL .dat file.
    #[arg(long)]
    pub data: PathBuf,
    /// Class values mapped to the minority label when --data is a bare file.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub positive: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Penalty weight; defaults to the middle of the grid, 0.032 n^(-1/3).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Leaf budget; defaults to floor(2 sqrt(n)).
    #[arg(long)]
    pub max_leaves: Option<usize>,
    /// Enable the feature-selection gate.
    #[arg(long)]
    pub feature_selection: bool,
    #[arg(long, default_value_t = 4.0)]
    pub c0: f64,
    /// Minority weight; defaults to max(1, floor(n0/n1)).
    #[arg(long)]
    pub alpha: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite existing outputs.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// CSV to write; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of dataset specs, or a single spec file.
    #[arg(long)]
    pub datasets: PathBuf,
    /// Comma-separated methods.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "svr,svr-select,duplicate,smote,bsmote,adasyn"
    )]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub outer_folds: usize,
    #[arg(long, default_value_t = 5)]
    pub inner_folds: usize,
    /// Use this penalty for every SVR fit instead of selecting one.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 4.0)]
    pub c0: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Also rasterize the decision set at this many cells per axis.
    #[arg(long)]
    pub oracle_resolution: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[arg(long, default_value_t = 5)]
    pub n_min: usize,
    #[arg(long, default_value_t = 200)]
    pub n_maj: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

fn configure_threads() {
    let Ok(value) = std::env::var("SVRTREE_THREADS") else {
        return;
    };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                log::warn!("cannot set thread count: {e}");
            }
        }
        _ => log::warn!("ignoring SVRTREE_THREADS={value:?}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let outcome = match cli.command {
        Command::Fit(a) => commands::fit(&a, &argv),
        Command::Predict(a) => commands::predict(&a, &argv),
        Command::Bench(a) => commands::bench(&a, &argv),
        Command::SvrInspect(a) => commands::svr_inspect(&a),
        Command::Toy(a) => commands::toy(&a, &argv),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
