use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

#[derive(Parser, Debug)]
#[command(
    name = "cpdnet",
    version,
    about = "Change point detection on evolving networks via degree distributions"
)]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect change points in a timestamped edge list.
    Detect(DetectArgs),
    /// Generate a synthetic snapshot stream with planted changes.
    Simulate(SimulateArgs),
    /// Score a change report against ground truth.
    Evaluate(EvaluateArgs),
    /// Run a named synthetic experiment end to end, repeatedly.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct DetectorArgs {
    /// Comma-separated window lengths in snapshots.
    #[arg(long, value_delimiter = ',')]
    pub window_lengths: Option<Vec<usize>>,
    /// Flag a boundary when its p-value exceeds this.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Bootstrap replicates per boundary.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Draws per replicate: `effective`, `base`, or a count.
    #[arg(long)]
    pub bootstrap_sample: Option<String>,
    /// Windows with fewer nodes are skipped.
    #[arg(long)]
    pub min_nodes: Option<usize>,
    /// Reduce larger windows to this many sampled node degrees (200 if no
    /// value is given).
    #[arg(long, num_args = 0..=1, default_missing_value = "200")]
    pub subsample: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    /// Edge list: one `timestamp,source,target` event per line.
    pub edges: PathBuf,
    #[arg(long, default_value_t = cpdnet_core::ingest::WEEK_SECONDS)]
    pub bucket_seconds: i64,
    /// Bucket by UTC calendar month instead of fixed widths.
    #[arg(long, conflicts_with = "bucket_seconds")]
    pub calendar_months: bool,
    /// `first-event` or an epoch timestamp.
    #[arg(long, default_value = "first-event")]
    pub origin: String,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Column positions of time, source and target.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0, 1, 2])]
    pub columns: Vec<usize>,
    /// Keep only interactions between nodes listed in this file.
    #[arg(long)]
    pub allow_list: Option<PathBuf>,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub format: Option<Format>,
    #[arg(long, short, default_value = "cpdnet-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["preset", "config"])))]
pub struct SimulateArgs {
    /// Built-in scenario: exp1, exp2, exp3, exp3-varying, minimal.
    #[arg(long)]
    pub preset: Option<String>,
    /// Scenario TOML file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Timestamp spacing between snapshots in the exported stream.
    #[arg(long, default_value_t = 1)]
    pub bucket_seconds: i64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short, default_value = "cpdnet-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Change report JSON written by `detect`.
    #[arg(long)]
    pub report: PathBuf,
    /// Ground truth JSON written by `simulate`.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value_t = cpdnet_core::eval::DEFAULT_TOLERANCE)]
    pub tolerance: usize,
    #[arg(long)]
    pub format: Option<Format>,
    #[arg(long, short, default_value = "cpdnet-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// exp1, exp2, exp3, exp3-varying or minimal.
    pub preset: String,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = cpdnet_core::eval::DEFAULT_TOLERANCE)]
    pub tolerance: usize,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Also write experiment.json / experiment.csv here.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || match cli.command {
        Command::Detect(args) => commands::detect(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Experiment(args) => commands::experiment(args),
    };
    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(anyhow::Error::from)
            .and_then(|pool| pool.install(run)),
        None => run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
