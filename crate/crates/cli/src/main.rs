//! `qfrag` — predict, cut, execute, and reconstruct gate-model quantum
//! circuits from the command line.

mod commands;
mod common;
mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use common::BackendArg;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "qfrag",
    version,
    about = "Noise-aware error prediction, circuit cutting, and classical reconstruction",
    propagate_version = true
)]
struct Cli {
    /// Base seed for every stochastic stage (noise streams, synthetic
    /// corpora, data splits). Overrides the noise file's seed.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    /// Noise-model JSON file: {"p1": .., "p2": .., "p_ro": ..[, "p_idle": ..,
    /// "seed": ..]}. Defaults to the built-in model (p1=0.002, p2=0.02,
    /// p_idle=0.002, p_ro=0.03).
    #[arg(long, global = true, value_name = "FILE")]
    noise: Option<PathBuf>,

    /// Shots per sampled execution.
    #[arg(long, global = true, value_name = "N", default_value_t = 128)]
    shots: usize,

    /// Directory for output files. Commands that print to stdout write files
    /// only when this is given; `run`, `cut`, and `bench` default to
    /// `qfrag-out`.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Where a corpus of circuits comes from: a directory of `.qasm` files or a
/// seeded synthetic batch.
#[derive(Args)]
struct CorpusArgs {
    /// Directory of .qasm circuit files.
    #[arg(
        long,
        value_name = "DIR",
        required_unless_present = "synthetic",
        conflicts_with = "synthetic"
    )]
    corpus: Option<PathBuf>,

    /// Generate this many seeded random circuits instead of reading a
    /// directory.
    #[arg(long, value_name = "N")]
    synthetic: Option<usize>,

    /// Smallest register for synthetic circuits.
    #[arg(long, value_name = "N", default_value_t = 3)]
    min_qubits: usize,

    /// Largest register for synthetic circuits.
    #[arg(long, value_name = "N", default_value_t = 6)]
    max_qubits: usize,

    /// Fewest gates for synthetic circuits.
    #[arg(long, value_name = "N", default_value_t = 4)]
    min_gates: usize,

    /// Most gates for synthetic circuits.
    #[arg(long, value_name = "N", default_value_t = 16)]
    max_gates: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// OpenQASM circuit file.
    #[arg(long, value_name = "FILE")]
    circuit: PathBuf,

    /// Execution backend (the QFRAG_BACKEND environment variable overrides
    /// this).
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
}

#[derive(Args)]
struct DatasetArgs {
    #[command(flatten)]
    source: CorpusArgs,

    /// Output CSV path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FamilyArg {
    Linear,
    Lasso,
    Forest,
    Svr,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum GridArg {
    /// No hyperparameter search; use --c/--gamma as given.
    None,
    /// Two-stage cross-validated search for SVR's C and gamma.
    CoarseFine,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset CSV produced by `qfrag dataset`.
    #[arg(long, value_name = "FILE")]
    data: PathBuf,

    /// Model family to fit.
    #[arg(long, value_enum)]
    model: FamilyArg,

    /// Hyperparameter search strategy (SVR only).
    #[arg(long, value_enum, default_value_t = GridArg::None)]
    grid: GridArg,

    /// Output path for the trained-model JSON.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,

    /// Polynomial expansion degree (linear and lasso).
    #[arg(long, default_value_t = 1)]
    degree: u32,

    /// Lasso regularization strength.
    #[arg(long, default_value_t = 0.1)]
    strength: f64,

    /// Number of trees (forest).
    #[arg(long, default_value_t = 100)]
    trees: usize,

    /// SVR penalty C (ignored when the grid search chooses it).
    #[arg(long, default_value_t = 100.0)]
    c: f64,

    /// RBF kernel width gamma (ignored when the grid search chooses it).
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,

    /// SVR insensitive-tube half-width.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,

    /// Cross-validation folds for the grid search.
    #[arg(long, default_value_t = 5)]
    folds: usize,

    /// Fraction of rows used for fitting; the rest scores the model.
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained-model JSON file.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,

    /// OpenQASM circuit file.
    #[arg(long, value_name = "FILE")]
    circuit: PathBuf,
}

#[derive(Args)]
struct CutArgs {
    /// OpenQASM circuit file.
    #[arg(long, value_name = "FILE")]
    circuit: PathBuf,

    /// Trained-model JSON file used to predict fragment errors.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,

    /// Predicted-error percentage above which a circuit is split.
    #[arg(long, default_value_t = 50.0)]
    threshold: f64,

    /// Cut-size budget: most wire segments severed by one cut.
    #[arg(long, default_value_t = 2)]
    k: usize,

    /// Deepest level of recursive splitting.
    #[arg(long, default_value_t = 8)]
    max_depth: usize,

    /// Where to write the fragmentation plan (default: <out-dir>/plan.json).
    #[arg(long, value_name = "FILE")]
    plan_out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// OpenQASM circuit file.
    #[arg(long, value_name = "FILE")]
    circuit: PathBuf,

    /// Trained-model JSON file used to predict fragment errors.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,

    /// Predicted-error percentage above which a circuit is split.
    #[arg(long, default_value_t = 50.0)]
    threshold: f64,

    /// Cut-size budget: most wire segments severed by one cut.
    #[arg(long, default_value_t = 2)]
    k: usize,

    /// Deepest level of recursive splitting.
    #[arg(long, default_value_t = 8)]
    max_depth: usize,

    /// Execution backend for the fragments (the QFRAG_BACKEND environment
    /// variable overrides this).
    #[arg(long, value_enum, default_value_t = BackendArg::NoisyShots)]
    backend: BackendArg,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    source: CorpusArgs,

    /// Trained-model JSON file used to predict fragment errors.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,

    /// Predicted-error percentage above which a circuit is split.
    #[arg(long, default_value_t = 50.0)]
    threshold: f64,

    /// Cut-size budget: most wire segments severed by one cut.
    #[arg(long, default_value_t = 2)]
    k: usize,

    /// Deepest level of recursive splitting.
    #[arg(long, default_value_t = 8)]
    max_depth: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: CorpusArgs,

    /// Shot exponents to test: `lo..=hi`, `lo..hi`, or `a,b,c`. Each
    /// exponent x runs the corpus at 2^x shots.
    #[arg(long, value_name = "RANGE", default_value = "1..=13")]
    exponents: String,

    /// Degree of the polynomial trend fitted to error versus exponent.
    #[arg(long, default_value_t = 3)]
    degree: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one circuit and print its outcome distribution as CSV.
    Simulate(SimulateArgs),
    /// Measure a corpus and emit a labelled training dataset as CSV.
    Dataset(DatasetArgs),
    /// Train a regression model on a dataset CSV and save it as JSON.
    Train(TrainArgs),
    /// Predict a circuit's execution-error percentage with a trained model.
    Predict(PredictArgs),
    /// Recursively plan wire cuts for a circuit and write the plan JSON.
    Cut(CutArgs),
    /// Full pipeline: predict, cut, execute fragments, reconstruct, report.
    Run(RunArgs),
    /// Compare full noisy execution against cut-and-reconstruct per circuit.
    Bench(BenchArgs),
    /// Sweep shot budgets and report the exponent minimizing corpus error.
    #[command(name = "shots-sweep")]
    ShotsSweep(SweepArgs),
}

/// Global context shared by every command.
pub struct Ctx {
    /// Effective base seed (explicit flag or the default 7).
    pub seed: u64,
    pub noise: qfrag_core::NoiseModel64,
    pub shots: usize,
    /// Explicit --out-dir, when given.
    pub out_dir: Option<PathBuf>,
}

impl Ctx {
    /// The output directory for commands that always write files.
    pub fn out_dir_or_default(&self) -> PathBuf {
        self.out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("qfrag-out"))
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let noise = common::load_noise(cli.noise.as_deref(), cli.seed)?;
    let ctx = Ctx {
        seed: cli.seed.unwrap_or(qfrag_core::NoiseModel64::default().seed),
        noise,
        shots: cli.shots,
        out_dir: cli.out_dir,
    };
    match cli.command {
        Command::Simulate(args) => commands::simulate::run(args, &ctx),
        Command::Dataset(args) => commands::dataset::run(args, &ctx),
        Command::Train(args) => commands::train::run(args, &ctx),
        Command::Predict(args) => commands::predict::run(args, &ctx),
        Command::Cut(args) => commands::cut::run(args, &ctx),
        Command::Run(args) => commands::run::run(args, &ctx),
        Command::Bench(args) => commands::bench::run(args, &ctx),
        Command::ShotsSweep(args) => commands::sweep::run(args, &ctx),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("qfrag: {e}");
        std::process::exit(e.exit_code());
    }
}
