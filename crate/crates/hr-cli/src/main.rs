mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardy_rellich::profile::ProfileExpr;
use hardy_rellich::sweep::Suite;

/// Verification sweeps, coefficient tables and sharp-constant estimates for
/// weighted Hardy-Rellich identities.
#[derive(Debug, Parser)]
#[command(name = "hardy-rellich", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run identity and inequality suites and write a residual report.
    Verify(VerifyArgs),
    /// Shorthand for `verify --suite hyperbolic`.
    Hyperbolic(VerifyArgs),
    /// Dump the exact coefficient tables.
    Coefficients(CoefficientArgs),
    /// Estimate the sharp constants by Rayleigh-quotient minimization.
    Sharp(SharpArgs),
    /// Cross-validate closed-form moments against adaptive quadrature.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Space {
    Euclidean,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Grad,
    Rellich,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Config file of `key = value` lines with `[section]` headers; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Suites to run: euclid, log, manifold, hyperbolic.
    #[arg(long, value_delimiter = ',')]
    pub suite: Option<Vec<Suite>>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub ell: Option<Vec<u32>>,
    /// Log-suite parameters `b`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Option<Vec<f64>>,
    /// Test families as `a:b:k` bumps `((r-a)(b-r))^k`.
    #[arg(long, value_delimiter = ',')]
    pub family: Option<Vec<String>>,
    /// Relative tolerance of closed-form identities.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Tolerance of quadrature-backed checks.
    #[arg(long)]
    pub quad_tol: Option<f64>,
    /// Slack floor of inequality probes.
    #[arg(long)]
    pub ineq_tol: Option<f64>,
    /// Random bumps per inequality probe.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weight profile of the manifold suite.
    #[arg(long = "V", allow_hyphen_values = true)]
    pub weight: Option<ProfileExpr>,
    /// Bessel profile of the manifold suite.
    #[arg(long = "f", allow_hyphen_values = true)]
    pub profile: Option<ProfileExpr>,
    /// Model space of the manifold suite.
    #[arg(long, value_enum)]
    pub space: Option<Space>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct CoefficientArgs {
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    /// Largest order `m`.
    #[arg(long)]
    pub m: Option<u32>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct SharpArgs {
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub target: Option<TargetArg>,
    /// Half-width `w` of the window `[-w, w]` in `t = ln r`.
    #[arg(long)]
    pub window: Option<f64>,
    /// Grid nodes including the two boundary nodes.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub ell_max: Option<u32>,
    /// Extra windows for a convergence study.
    #[arg(long, value_delimiter = ',')]
    pub study: Option<Vec<f64>>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: Output,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => commands::verify(a, None),
        Command::Hyperbolic(a) => commands::verify(a, Some(Suite::Hyperbolic)),
        Command::Coefficients(a) => commands::coefficients(a),
        Command::Sharp(a) => commands::sharp(a),
        Command::Oracle(a) => commands::oracle(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(commands::CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(commands::CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
