use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logit_stability::Error;

mod commands;

/// Exact stochastic-stability analysis of logit dynamics.
#[derive(Debug, Parser)]
#[command(name = "logit-stability", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stable sets, stochastic potentials and the six PoA/PoS ratios.
    Analyze(AnalyzeArgs),
    /// Simulate logit dynamics and write the occupancy histogram.
    Simulate(SimulateArgs),
    /// Compare the exact stable set with stationary distributions along a β ladder.
    Verify(VerifyArgs),
    /// Print a builtin instance as a JSON game file.
    Instance(InstanceArgs),
    /// Emit data tables: load-balancing bounds, β curves, parallel-links diagnostics.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Triangle,
    LbUnit,
    LbPos,
    Parallel,
    LbCustom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RevisionKind {
    Independent,
    Async,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct BuiltinParams {
    /// Number of machines (lb-unit, lb-pos, lb-custom).
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Job multiplicity (lb-unit, lb-pos).
    #[arg(long, default_value_t = 2)]
    pub l: usize,
    /// Link costs, comma separated (parallel).
    #[arg(long, default_value = "1,2")]
    pub costs: String,
    /// Number of players (parallel).
    #[arg(long, default_value_t = 3)]
    pub players: usize,
    /// Job weights, comma separated (lb-custom).
    #[arg(long)]
    pub jobs: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct GameSource {
    /// A builtin instance.
    #[arg(long, value_enum, conflicts_with = "file", required_unless_present = "file")]
    pub builtin: Option<Builtin>,
    /// A JSON game file.
    #[arg(long)]
    pub file: Option<std::path::PathBuf>,
    #[command(flatten)]
    pub params: BuiltinParams,
}

#[derive(Debug, Clone, Args)]
pub struct RevisionArgs {
    #[arg(long, value_enum, default_value = "independent")]
    pub revision: RevisionKind,
    /// Revision probability of independent learning, as "p/q".
    #[arg(long, default_value = "1/2")]
    pub p: String,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub game: GameSource,
    #[command(flatten)]
    pub revision: RevisionArgs,
    /// json: the full report; csv: one row per state.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
    /// Also write the per-state CSV here.
    #[arg(long)]
    pub states_csv: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub game: GameSource,
    #[command(flatten)]
    pub revision: RevisionArgs,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial state id.
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    /// Occupancy CSV destination (stdout if absent).
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct LadderArgs {
    /// Comma-separated, strictly increasing β values.
    #[arg(long, default_value = "4,8,16,32,64")]
    pub betas: String,
    /// Vanishing threshold on the fitted slope of ln μ against β.
    #[arg(long, default_value_t = 1e-3)]
    pub slope_tol: f64,
    /// Trailing ladder points used in the slope fit.
    #[arg(long, default_value_t = 2)]
    pub fit_window: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub game: GameSource,
    #[command(flatten)]
    pub revision: RevisionArgs,
    #[command(flatten)]
    pub ladder: LadderArgs,
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(value_enum)]
    pub name: Builtin,
    #[command(flatten)]
    pub params: BuiltinParams,
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    /// Load-balancing ratios against their bounds for each l.
    Table1 {
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Comma-separated values of l.
        #[arg(long, default_value = "1,2,3")]
        l: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// CSV of β against ln μ^β(s) for every state.
    Curve {
        #[command(flatten)]
        game: GameSource,
        #[command(flatten)]
        revision: RevisionArgs,
        #[arg(long, default_value = "4,8,16,32,64")]
        betas: String,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Radius, coradius and switching threshold for parallel links.
    Parallel {
        #[arg(long, default_value = "1,2")]
        costs: String,
        #[arg(long, default_value_t = 3)]
        players: usize,
        #[command(flatten)]
        revision: RevisionArgs,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
}

/// Process exit status for a library error.
fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(commands::Disagreement) = err.downcast_ref() {
        return 5;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. } | Error::Schema(_) | Error::InvalidParams(_) | Error::Io { .. }) => 2,
        Some(Error::StateSpaceTooLarge { .. }) => 3,
        Some(Error::InternalInconsistency(_)) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => commands::analyze(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Instance(args) => commands::instance(&args),
        Command::Report(cmd) => commands::report(&cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
