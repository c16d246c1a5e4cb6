use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "tsc", version, about = "Train, benchmark, compare and inspect time-series classifiers")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model on one dataset and write its checkpoint.
    Train(TrainArgs),
    /// Train every requested model on every dataset; resumable.
    Bench(BenchArgs),
    /// Comparison statistics over a results table.
    Stats(StatsArgs),
    /// Class activation maps of one series under a trained checkpoint.
    Cam(CamArgs),
    /// Gramian angular summation field of a series or of learned filters.
    Gasf(GasfArgs),
    /// Write a synthetic corpus in UCR text format.
    Synth(SynthArgs),
}

/// Where a dataset comes from: UCR files or a generated corpus.
#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Directory holding `<name>_TRAIN` / `<name>_TEST` files.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<String>,
    /// Generate the data instead: sine-vs-square or cbf-like.
    #[arg(long, conflicts_with = "dataset")]
    pub synthetic: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub per_class: usize,
    #[arg(long, default_value_t = 64)]
    pub length: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
}

/// Training knobs shared by `train` and `bench`. Unset values fall back to
/// the config file, then to the built-in defaults.
#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainingArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// adam or adadelta; defaults by model.
    #[arg(long)]
    pub optimizer: Option<String>,
    /// Keep the learning rate fixed.
    #[arg(long)]
    pub no_plateau: bool,
    /// Fixed rate, documented defaults for epochs, batch and optimizer.
    #[arg(long)]
    pub paper_protocol: bool,
    /// TOML file with any of the training keys; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// mlp, fcn or resnet.
    #[arg(long)]
    pub model: Option<String>,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Comma-separated dataset names.
    #[arg(long, value_delimiter = ',')]
    pub datasets: Vec<String>,
    /// Benchmark a generated corpus instead of UCR files.
    #[arg(long, conflicts_with = "datasets")]
    pub synthetic: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub per_class: usize,
    #[arg(long, default_value_t = 64)]
    pub length: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "mlp,fcn,resnet")]
    pub models: Vec<String>,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Cells trained in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum TieArg {
    Min,
    Average,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum TailArg {
    OneSided,
    TwoSided,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Results CSV: dataset column, then one error column per model.
    #[arg(long, required_unless_present = "bundled")]
    pub results: Option<PathBuf>,
    /// Class counts CSV with dataset and classes columns.
    #[arg(long, required_unless_present = "bundled")]
    pub meta: Option<PathBuf>,
    /// Use the bundled 44-dataset, 11-model table.
    #[arg(long, conflicts_with_all = ["results", "meta"])]
    pub bundled: bool,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = TieArg::Min)]
    pub tie_rule: TieArg,
    #[arg(long, value_enum, default_value_t = TailArg::OneSided)]
    pub t_tail: TailArg,
    /// Continuity correction in the rank-sum test.
    #[arg(long)]
    pub continuity: bool,
    /// Z-score PCE within each dataset before t-tests, grouping and PCA.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum SplitArg {
    Train,
    Test,
}

#[derive(Debug, Args)]
pub struct CamArgs {
    /// Checkpoint directory written by `train`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GasfArgs {
    /// Transform the filters of this checkpoint instead of a series.
    #[arg(long, requires = "layer")]
    pub checkpoint: Option<PathBuf>,
    /// Layer index within the network's layer list.
    #[arg(long)]
    pub layer: Option<usize>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// sine-vs-square or cbf-like.
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value_t = 50)]
    pub per_class: usize,
    #[arg(long, default_value_t = 64)]
    pub length: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
