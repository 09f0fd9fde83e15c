use std::path::PathBuf;

use arb_core::EngineKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Reconstruct missing node attributes by boosted feature propagation.
#[derive(Debug, Parser)]
#[command(name = "arb", version, about)]
pub struct Cli {
    /// Worker threads; 1 runs every kernel sequentially. Default: all cores.
    #[arg(long, global = true, env = "ARB_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one engine and write the full reconstructed matrix.
    Reconstruct(ReconstructArgs),
    /// Run one engine on a split and score the held-out nodes.
    Evaluate(EvaluateArgs),
    /// Tune alpha and beta on the validation nodes.
    Search(SearchArgs),
    /// Score engines across missing-attribute rates; emits CSV.
    Sweep(SweepArgs),
    /// Time a fixed number of propagation iterations.
    Bench(BenchArgs),
    /// Generate a synthetic dataset.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Edge list: two node indices per line, optional `N <count>` header.
    #[arg(long)]
    pub graph: PathBuf,
    /// Ground-truth features, CSV/whitespace text or ARBF binary.
    #[arg(long)]
    pub features: PathBuf,
    /// Class ids, one per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long, default_value = "arb")]
    pub engine: EngineKind,
    /// Propagation weight in (0, 1]. Default 0.5.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Known-row reset weight in (0, 1]. Default 0.5.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Maximum number of iterations.
    #[arg(long, default_value_t = arb_core::propagation::DEFAULT_MAX_ITERS)]
    pub iters: usize,
    /// Relative change that stops iteration early; 0 runs every iteration.
    #[arg(long, default_value_t = arb_core::propagation::DEFAULT_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Share of nodes whose attributes are observed.
    #[arg(long, default_value_t = 0.4)]
    pub known_fraction: f64,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Known node indices, one per line. Overrides the random split.
    #[arg(long)]
    pub known: Option<PathBuf>,
    /// Output matrix; `.csv`, `.tsv` or `.txt` write text, anything else ARBF.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricName {
    Recall,
    Ndcg,
    Rmse,
    Corr,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Cutoffs for the ranking metrics.
    #[arg(long, value_delimiter = ',', default_value = "10,20,50")]
    pub k: Vec<usize>,
    /// Metrics to compute. Default: ranking metrics for binary features,
    /// RMSE and CORR otherwise.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<MetricName>,
    /// Score every unknown node instead of the test partition.
    #[arg(long)]
    pub all_unknown: bool,
    /// Use the ground truth as the prediction, skipping the engine.
    #[arg(long)]
    pub inject_truth: bool,
    /// Also write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long, default_value_t = 200)]
    pub max_evals: usize,
    #[arg(long, default_value_t = 0.25)]
    pub initial_step: f64,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub min_step: f64,
    /// Write the best configuration as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Missing-attribute rates.
    #[arg(long, value_delimiter = ',', default_value = "0.4,0.6,0.8,0.9,0.99")]
    pub rates: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "fp,arb-no-ve,arb-no-bc,arb"
    )]
    pub engines: Vec<EngineKind>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "10,20,50")]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = arb_core::propagation::DEFAULT_MAX_ITERS)]
    pub iters: usize,
    #[arg(long, default_value_t = arb_core::propagation::DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Tune each engine on the validation nodes of every split.
    #[arg(long)]
    pub search: bool,
    #[arg(long)]
    pub all_unknown: bool,
    /// Cross-validate a softmax classifier on the reconstructed rows.
    #[arg(long)]
    pub classify: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Edge list to time on; a uniform random graph is generated otherwise.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Feature matrix; random values of `--dim` columns otherwise.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub nodes: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub edges: usize,
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    #[arg(long, value_delimiter = ',', default_value = "fp,arb")]
    pub engines: Vec<EngineKind>,
    #[arg(long, default_value_t = 0.9)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.7)]
    pub beta: f64,
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Arbf,
    Csv,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 1000)]
    pub nodes: usize,
    /// Uniform random graph with this many edges instead of a long-tail one.
    #[arg(long)]
    pub edges: Option<usize>,
    #[arg(long, default_value_t = 4.0)]
    pub mean_degree: f64,
    #[arg(long, default_value_t = 2.5)]
    pub exponent: f64,
    #[arg(long, default_value_t = 0.1)]
    pub isolated_fraction: f64,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Binary)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Arbf)]
    pub format: FormatArg,
    /// Directory receiving edges.txt, features.{arbf,csv} and labels.txt.
    #[arg(long)]
    pub out_dir: PathBuf,
}
