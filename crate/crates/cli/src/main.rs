use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Predict batch-job runtimes and pick the cheapest device configuration for
/// every workflow.
#[derive(Debug, Parser)]
#[command(name = "jobcost", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a problem document and summarize it.
    Validate(InOut),
    /// Fit a runtime model on run records.
    Train(TrainArgs),
    /// Pick the penalty weight by cross-validation.
    Tune(TuneArgs),
    /// Fill a problem's durations from a runtime model.
    Predict(PredictArgs),
    /// Solve for the minimum-cost assignment and its schedule.
    Schedule(ScheduleArgs),
    /// Compute throughput, reliability and cost change from a run log.
    Report(InOut),
    /// Generate synthetic problems or run records.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Find the optimum by exhaustive enumeration.
    Oracle(InOut),
}

#[derive(Debug, Args)]
struct InOut {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ols,
    Ridge,
    Lasso,
    ElasticNet,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    io: InOut,
    #[arg(long, value_enum, default_value = "ridge")]
    family: FamilyArg,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// L1 share of the penalty; elastic net only.
    #[arg(long, default_value_t = 0.5)]
    l1_ratio: f64,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    io: InOut,
    #[arg(long, value_enum, default_value = "ridge")]
    family: FamilyArg,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0.5)]
    l1_ratio: f64,
    /// Shuffle rows into folds with this seed instead of `index mod folds`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[command(flatten)]
    io: InOut,
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Run-record CSV whose job ids name the workflows.
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    #[command(flatten)]
    io: InOut,
    /// Predict durations with this model instead of using the durations block.
    #[arg(long, value_name = "FILE", requires = "features", conflicts_with = "no_model")]
    model: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "model")]
    features: Option<PathBuf>,
    /// Use the document's durations block.
    #[arg(long)]
    no_model: bool,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Absolute optimality gap used for pruning.
    #[arg(long)]
    gap: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// A scheduling problem with durations.
    Problem(GenProblemArgs),
    /// Run records with a planted linear runtime law.
    Records(GenRecordsArgs),
}

#[derive(Debug, Args)]
struct GenProblemArgs {
    /// JSON generator settings; flags override them.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workflows: Option<usize>,
    #[arg(long)]
    devices: Option<usize>,
    #[arg(long)]
    configs: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    slack: Option<f64>,
}

#[derive(Debug, Args)]
struct GenRecordsArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5000)]
    n: usize,
    /// Gaussian noise standard deviation, seconds.
    #[arg(long, default_value_t = 60.0)]
    noise: f64,
    #[arg(long, default_value_t = 5)]
    runs_per_job: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(a) => commands::validate(&a),
        Command::Train(a) => commands::train(&a),
        Command::Tune(a) => commands::tune(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Schedule(a) => commands::schedule(&a),
        Command::Report(a) => commands::report(&a),
        Command::Gen { what: GenCommand::Problem(a) } => commands::gen_problem(&a),
        Command::Gen { what: GenCommand::Records(a) } => commands::gen_records(&a),
        Command::Oracle(a) => commands::oracle(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
