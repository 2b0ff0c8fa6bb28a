use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use aptemper::oracle::OracleTargetKind;
use aptemper::AdaptationMode;

#[derive(Parser)]
#[command(name = "aptemper", version, about = "Adaptive parallel tempering MCMC")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sampler described by a configuration file.
    Run(RunArgs),
    /// Re-run one of the built-in experiment protocols.
    Reproduce(ReproduceArgs),
    /// Solve for the stationary temperature ladder of a one-dimensional target.
    Oracle(OracleArgs),
}

/// Values that override the configuration file.
#[derive(Args, Default)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub iters: Option<u64>,
    #[arg(long)]
    pub burnin: Option<u64>,
    #[arg(long, value_parser = parse_mode)]
    pub adaptation: Option<AdaptationMode>,
    #[arg(long)]
    pub thin: Option<u64>,
}

#[derive(Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "aptemper-out")]
    pub out_dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Table1,
    Table2,
    Table3,
    Ising,
}

#[derive(Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub protocol: Protocol,
    #[arg(long, default_value_t = 100)]
    pub replications: usize,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "aptemper-out")]
    pub out_dir: PathBuf,
    /// Base seed; replication `r` uses `seed + r`.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Run a single adaptation mode instead of all three.
    #[arg(long, value_parser = parse_mode)]
    pub adaptation: Option<AdaptationMode>,
    /// Iteration counts for table3 (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [10_000u64, 20_000, 40_000, 80_000, 160_000])]
    pub sizes: Vec<u64>,
    /// Observed image for the ising protocol (ASCII 0/1 grid or PBM).
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long)]
    pub iters: Option<u64>,
    #[arg(long)]
    pub burnin: Option<u64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub thin: Option<u64>,
}

#[derive(Args)]
pub struct OracleArgs {
    /// normal, laplace or bimodal.
    #[arg(value_parser = parse_oracle_target)]
    pub target: OracleTargetKind,
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    #[arg(long, default_value_t = 0.234)]
    pub alpha_star: f64,
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub rho_lo: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub rho_hi: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

fn parse_mode(s: &str) -> Result<AdaptationMode, String> {
    s.parse()
}

fn parse_oracle_target(s: &str) -> Result<OracleTargetKind, String> {
    s.parse()
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad invocation or configuration (exit 2).
    Usage(String),
    /// Anything that went wrong while running (exit 1).
    Runtime(String),
}

impl From<aptemper::Error> for Failure {
    fn from(e: aptemper::Error) -> Self {
        match e {
            aptemper::Error::Config { .. } | aptemper::Error::Parse { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Run(args) => commands::run(args),
        Command::Reproduce(args) => commands::reproduce(args),
        Command::Oracle(args) => commands::oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
