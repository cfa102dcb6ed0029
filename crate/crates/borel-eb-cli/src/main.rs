//! Command-line front end: seeded sampling, single-point estimation, risk
//! evaluation, and one-command reproduction of the study tables, all as CSV.
//!
//! Exit codes: 0 success, 2 domain/flag error, 3 input-file error, 4 numeric
//! non-convergence.

mod commands;
mod output;
mod settings;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "borel-eb",
    about = "Borel-Tanner sampling, empirical Bayes estimation and regret-risk tables",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw seeded Borel-Tanner samples as index,x rows.
    Sample(SampleArgs),
    /// Estimate the reproduction parameter from a single observation.
    Estimate(EstimateArgs),
    /// Bayes risk, minimum risk and regret of an estimator over a range.
    Risk(RiskArgs),
    /// Reproduce the study tables (one: per-x estimates; two: mean regrets).
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Generation-by-generation branching simulation.
    Gw,
    /// Inversion of the cumulative distribution.
    Inverse,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RiskEstimator {
    Mle,
    Bayes,
    /// Plug-in rule fed from a kind,x,count frequency-table CSV.
    NpebFile,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    One,
    Two,
}

#[derive(clap::Args)]
pub struct SampleArgs {
    /// Reproduction parameter in (0,1).
    #[arg(long)]
    theta: Option<f64>,
    /// Ancestor count.
    #[arg(long)]
    r: Option<u64>,
    /// Number of draws.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct EstimateArgs {
    /// Present observation (total progeny).
    #[arg(long)]
    x: Option<u64>,
    #[arg(long)]
    r: Option<u64>,
    #[arg(long)]
    gamma: Option<u64>,
    #[arg(long, value_enum)]
    estimator: RiskEstimator,
    #[arg(long)]
    prior_a: Option<f64>,
    #[arg(long)]
    prior_b: Option<f64>,
    /// Frequency-table CSV for estimator npeb-file.
    #[arg(long)]
    freq_table: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct RiskArgs {
    #[arg(long, value_enum)]
    estimator: RiskEstimator,
    #[arg(long)]
    r: Option<u64>,
    #[arg(long)]
    gamma: Option<u64>,
    #[arg(long)]
    prior_a: Option<f64>,
    #[arg(long)]
    prior_b: Option<f64>,
    /// Lower end of the summation range.
    #[arg(long)]
    xmin: Option<u64>,
    /// Upper end of the summation range.
    #[arg(long)]
    xmax: Option<u64>,
    /// Shorthand LO-HI range (overrides xmin/xmax).
    #[arg(long)]
    range: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    table: Table,
    /// Comma-separated past-sample sizes (default 50,75,100).
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    r: Option<u64>,
    #[arg(long)]
    gamma: Option<u64>,
    #[arg(long)]
    prior_a: Option<f64>,
    #[arg(long)]
    prior_b: Option<f64>,
    /// Restrict table two to one LO-HI range.
    #[arg(long)]
    range: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// A command failure carrying its process exit code.
#[derive(Debug)]
pub struct CliFailure {
    code: i32,
    message: String,
}

impl CliFailure {
    fn usage(message: String) -> Self {
        Self { code: 2, message }
    }

    fn input_file(message: String) -> Self {
        Self { code: 3, message }
    }
}

impl From<borel_eb::Error> for CliFailure {
    fn from(err: borel_eb::Error) -> Self {
        let code = match &err {
            borel_eb::Error::InvalidParams(_) | borel_eb::Error::Domain(_) => 2,
            borel_eb::Error::InvalidInput(_) => 3,
            borel_eb::Error::QuadratureNonConvergence { .. }
            | borel_eb::Error::SimulationOverflow { .. } => 4,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

impl From<String> for CliFailure {
    fn from(message: String) -> Self {
        Self::usage(message)
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sample(args) => commands::cmd_sample(args),
        Command::Estimate(args) => commands::cmd_estimate(args),
        Command::Risk(args) => commands::cmd_risk(args),
        Command::Reproduce(args) => commands::cmd_reproduce(args),
    };
    if let Err(failure) = outcome {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}
