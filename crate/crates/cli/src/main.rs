//! `simsub` command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 internal invariant breach.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "simsub", version, about = "Similar-subtrajectory search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a CSV/JSONL dataset into the canonical binary store
    Ingest(IngestArgs),
    /// Train a splitting policy with deep Q-learning
    Train(TrainArgs),
    /// Top-k similar subtrajectories over a database
    Search(SearchArgs),
    /// Score algorithms on sampled (data, query) pairs against exhaustive ranking
    Bench(BenchArgs),
    /// Generate an adversarial instance from the appendix constructions
    Advgen(AdvgenArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Auto,
    Csv,
    Jsonl,
    Store,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FeaturesArg {
    /// with-suffix for dtw/frechet, prefix-only for gridembed
    Auto,
    WithSuffix,
    PrefixOnly,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AdvKind {
    Sizes,
    Pss,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Input dataset
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: FormatArg,
    /// Output store path
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the canonical CSV rendering of the parsed dataset
    #[arg(long)]
    pub export_csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct MeasureArgs {
    /// dtw, frechet or gridembed
    #[arg(long, default_value = "dtw")]
    pub measure: String,
    /// Grid side for gridembed
    #[arg(long, default_value_t = 1.0)]
    pub cell: f64,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Data trajectories (store, CSV or JSONL)
    #[arg(long)]
    pub data: PathBuf,
    /// Query trajectories
    #[arg(long)]
    pub queries: PathBuf,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = 1000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum skip length; 0 trains a plain RLS policy
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Reward discount
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    /// Adam learning rate
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    /// Replay memory capacity
    #[arg(long, default_value_t = 2000)]
    pub replay: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 1.0)]
    pub eps_start: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps_min: f64,
    /// Per-episode multiplicative epsilon decay
    #[arg(long, default_value_t = 0.99)]
    pub eps_decay: f64,
    #[arg(long, default_value_t = 20)]
    pub hidden: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub features: FeaturesArg,
    /// Policy output (JSON)
    #[arg(long)]
    pub out: PathBuf,
    /// Training log CSV (episode, theta_best, epsilon, mean_loss, steps)
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct AlgoArgs {
    /// SizeS length slack
    #[arg(long, default_value_t = 5)]
    pub xi: usize,
    /// POS-D delay
    #[arg(long, default_value_t = 5)]
    pub delay: usize,
    /// Random-S sample count
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Sakoe-Chiba band ratio for spring and ucr (ucr defaults to 1.0)
    #[arg(long)]
    pub band: Option<f64>,
    /// Policy file for rls and rls-skip
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 1 keeps runs bit-reproducible
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Database (store, CSV or JSONL)
    #[arg(long)]
    pub data: PathBuf,
    /// Query trajectories; every trajectory in the file is run
    #[arg(long)]
    pub query: PathBuf,
    /// exacts, sizes, pss, pos, pos-d, random-s, spring, ucr, rls, rls-skip
    #[arg(long, default_value = "exacts")]
    pub algo: String,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[command(flatten)]
    pub algo_args: AlgoArgs,
    /// Results per query
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Filter candidates through the MBR index
    #[arg(long)]
    pub index: bool,
    /// Output CSV; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    /// Comma-separated algorithm list
    #[arg(long, default_value = "exacts,sizes,pss,pos,pos-d,random-s")]
    pub algos: String,
    /// Comma-separated measure list
    #[arg(long, default_value = "dtw")]
    pub measures: String,
    #[arg(long, default_value_t = 1.0)]
    pub cell: f64,
    /// Number of sampled (data, query) pairs
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    #[command(flatten)]
    pub algo_args: AlgoArgs,
    /// Per-pair and aggregate metrics CSV; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Timing CSV (monotonic milliseconds)
    #[arg(long)]
    pub timing: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AdvgenArgs {
    #[arg(long, value_enum)]
    pub kind: AdvKind,
    /// Circle count m for sizes (even, >= 4); repeated-point count n for pss
    #[arg(long)]
    pub size: usize,
    #[arg(long, default_value_t = 100.0)]
    pub d_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Output directory for data.csv, query.csv and predicted.json
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(|| match cli.command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::Train(a) => commands::train(&a),
        Command::Search(a) => commands::search(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Advgen(a) => commands::advgen(&a),
    });
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
        Err(_) => ExitCode::from(4),
    }
}
