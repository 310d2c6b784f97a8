//! The clap surface of the `eigenrank` binary.

use clap::{Args, Parser, Subcommand, ValueEnum};
use eigenrank_core::{OverlapMetric, ScoreMode};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "eigenrank",
    version,
    about = "Ensemble-disagreement engine: select informative training subsets and predict segmentation failures by the principal eigenvalue of pairwise Dice matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Print the Dice score of two mask files
    Dice { a: PathBuf, b: PathBuf },
    /// Print the pairwise agreement matrix of two or more masks with its
    /// spectrum, principal eigenvalue, entropies and PSD flag
    Matrix {
        #[arg(long, value_enum, default_value_t)]
        metric: MetricArg,
        #[arg(required = true, num_args = 2..)]
        masks: Vec<PathBuf>,
    },
    /// Run the selection loop over a pool manifest
    Select(SelectArgs),
    /// Rank pool cases by predicted segmentation failure
    Rank(RankArgs),
    /// Sample feasible agreement matrices and tabulate how strongly the
    /// principal eigenvalue dominates the spectrum's information
    Simulate(SimulateArgs),
    /// Generate a deterministic synthetic dataset (masks, images, manifest)
    SynthGen(SynthGenArgs),
    /// Evaluate one model against ground truth over a pool manifest
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum MetricArg {
    #[default]
    Dice,
    Jaccard,
}

impl From<MetricArg> for OverlapMetric {
    fn from(arg: MetricArg) -> Self {
        match arg {
            MetricArg::Dice => OverlapMetric::Dice,
            MetricArg::Jaccard => OverlapMetric::Jaccard,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum ScoreArg {
    #[default]
    LambdaMax,
    Entropy,
}

impl From<ScoreArg> for ScoreMode {
    fn from(arg: ScoreArg) -> Self {
        match arg {
            ScoreArg::LambdaMax => ScoreMode::LambdaMax,
            ScoreArg::Entropy => ScoreMode::NormalizedEntropy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum BackendArg {
    Synthetic,
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum ModeArg {
    Fixed,
    Iterative,
}

#[derive(Args)]
pub struct BackendOpts {
    #[arg(long, value_enum)]
    pub backend: BackendArg,
    /// External trainer, invoked as `<cmd> train --manifest M --model-out D`
    #[arg(long, required_if_eq("backend", "external"))]
    pub train_cmd: Option<String>,
    /// External predictor, invoked as `<cmd> predict --model D --image I --out O`
    #[arg(long, required_if_eq("backend", "external"))]
    pub predict_cmd: Option<String>,
    /// Working directory for external-backend artifacts (default: a
    /// process-specific directory under the system temp dir)
    #[arg(long)]
    pub work_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Cases per subset
    #[arg(long)]
    pub k: usize,
    /// Iterations T; the run selects k*T cases
    #[arg(long)]
    pub iterations: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t)]
    pub score: ScoreArg,
    #[command(flatten)]
    pub backend: BackendOpts,
}

#[derive(Args)]
pub struct RankArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t)]
    pub score: ScoreArg,
    /// Ensemble members for fixed mode, repeatable or comma-separated.
    /// Synthetic models are `theta` or `theta:jitter_seed`, external models
    /// are model directories
    #[arg(
        long = "models",
        visible_alias = "model",
        value_delimiter = ',',
        required_if_eq("mode", "fixed")
    )]
    pub models: Vec<String>,
    #[arg(long, required_if_eq("mode", "iterative"))]
    pub k: Option<usize>,
    #[arg(long, required_if_eq("mode", "iterative"))]
    pub iterations: Option<usize>,
    #[arg(long, required_if_eq("mode", "iterative"))]
    pub seed: Option<u64>,
    /// Probe model scored against ground truth after each elimination
    /// (same syntax as --model)
    #[arg(long, required_if_eq("mode", "iterative"))]
    pub probe: Option<String>,
    #[command(flatten)]
    pub backend: BackendOpts,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Ensemble sizes, repeatable or comma-separated
    #[arg(long = "t", required = true, value_delimiter = ',')]
    pub t_values: Vec<usize>,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// CSV destination; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthGenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub width: usize,
    #[arg(long, default_value_t = 32)]
    pub height: usize,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Model to evaluate (same syntax as rank --model)
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub backend: BackendOpts,
}
