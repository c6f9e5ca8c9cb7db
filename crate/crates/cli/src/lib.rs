//! `modanova` command-line interface.
//!
//! The binary is a thin wrapper over [`run`]; tests drive the same entry point.

mod analyze;
mod ingest;
mod inputs;
mod output;
mod similarity;
mod synth;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use output::sha256_hex;

#[derive(Debug, Parser, Serialize)]
#[command(name = "modanova", version, about = "Functional-ANOVA module importance for modular optimizers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Decompose performance variance into module effects.
    Analyze(AnalyzeArgs),
    /// Cosine similarity between per-problem effect vectors.
    Similarity(SimilarityArgs),
    /// Generate a full-factorial dataset with known effects.
    Synth(SynthArgs),
    /// Normalize run or trajectory CSVs into a solution-precision cell CSV.
    Ingest(IngestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioArg {
    Suite,
    Problem,
    AllProblems,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Forest,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FractionModeArg {
    Ratio,
    Pooled,
}

impl From<FractionModeArg> for modanova::FractionMode {
    fn from(m: FractionModeArg) -> Self {
        match m {
            FractionModeArg::Ratio => modanova::FractionMode::Ratio,
            FractionModeArg::Pooled => modanova::FractionMode::Pooled,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Config-space JSON file, or the built-in `modcma` / `modde`.
    #[arg(long)]
    pub space: String,
    /// Run, cell or dataset CSV files (kind detected from the header).
    #[arg(long, num_args = 1.., required_unless_present = "load_model")]
    pub data: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = ScenarioArg::Suite)]
    pub scenario: ScenarioArg,
    /// Problem id for `--scenario problem`.
    #[arg(long)]
    pub problem: Option<u32>,
    #[arg(long)]
    pub dim: Option<u32>,
    /// Evaluation budget: absolute (`2500`) or per dimension (`500d`).
    #[arg(long)]
    pub budget: Option<String>,
    #[arg(long, value_enum, default_value_t = Engine::Forest)]
    pub engine: Engine,
    /// One tree, no bootstrap, every module per split, min leaf 1.
    #[arg(long, conflicts_with_all = ["trees", "bootstrap", "features_per_split", "min_leaf", "max_depth"])]
    pub exact: bool,
    #[arg(long, default_value_t = 64)]
    pub trees: usize,
    #[arg(long, action = clap::ArgAction::Set, default_value_t = true)]
    pub bootstrap: bool,
    /// Modules drawn per split; defaults to ceil(n/2).
    #[arg(long)]
    pub features_per_split: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub min_leaf: usize,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Highest interaction order; defaults to min(3, modules).
    #[arg(long)]
    pub max_order: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FractionModeArg::Ratio)]
    pub fraction_mode: FractionModeArg,
    /// Label for the summary table; defaults to the space name.
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Rows kept in triplets.csv.
    #[arg(long, default_value_t = 10)]
    pub top_triplets: usize,
    #[arg(long, conflicts_with = "load_model")]
    pub save_model: Option<PathBuf>,
    #[arg(long)]
    pub load_model: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SimilarityArgs {
    /// Directory holding `problem_XX/effects.csv` files.
    #[arg(long)]
    pub effects_dir: PathBuf,
    /// Problem ids; defaults to every problem directory found.
    #[arg(long, value_delimiter = ',')]
    pub problems: Vec<u32>,
    /// Output directory; defaults to the effects directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub space: String,
    /// Truth spec JSON: `{"components": [{"modules": [...], "scale": s} | {"modules": [...], "values": [...]}]}`.
    #[arg(long)]
    pub truth: PathBuf,
    /// Absolute noise standard deviation.
    #[arg(long, default_value_t = 0.0, conflicts_with = "noise_relative")]
    pub noise: f64,
    /// Noise standard deviation as a multiple of the signal standard deviation.
    #[arg(long)]
    pub noise_relative: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub space: String,
    /// Long-format run CSVs.
    #[arg(long, num_args = 1.., required_unless_present = "trajectories")]
    pub runs: Vec<PathBuf>,
    /// Trajectory CSV (best-so-far per evaluation count).
    #[arg(long, requires_all = ["optima", "budgets"], conflicts_with = "runs")]
    pub trajectories: Option<PathBuf>,
    /// `problem_id,instance_id,optimum` CSV.
    #[arg(long)]
    pub optima: Option<PathBuf>,
    /// Budgets to extract, e.g. `100d,500d,1500d`.
    #[arg(long, value_delimiter = ',')]
    pub budgets: Vec<String>,
    /// Output cell CSV.
    #[arg(long)]
    pub out: PathBuf,
}

/// Failure of a command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<modanova::Error> for CliError {
    fn from(e: modanova::Error) -> Self {
        use modanova::Error as E;
        match e {
            E::Invariant(_) => CliError::Internal(e.to_string()),
            E::InvalidParams(_) | E::InvalidOrder { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Analyze(a) => analyze::run(a),
        Command::Similarity(a) => similarity::run(a),
        Command::Synth(a) => synth::run(a),
        Command::Ingest(a) => ingest::run(a),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code; clap help and version requests exit 0.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
