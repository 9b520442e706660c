//! `ar1persist`: persistence exponents of Gaussian AR(1) processes.
//!
//! Exit codes: 0 success, 1 check or convergence failure, 2 usage or
//! domain error.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Worker-thread count for the data-parallel loops. Never affects results.
pub const THREADS_ENV: &str = "AR1P_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "ar1persist",
    version,
    about = "Persistence exponents of Gaussian AR(1) processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Series coefficients K_0..K_order.
    Coeffs(commands::CoeffsArgs),
    /// Persistence exponent by series, Nystrom discretization, or both.
    Lambda(commands::LambdaArgs),
    /// Monte Carlo survival table, exponent fit and Nystrom comparison.
    Persistence(commands::PersistenceArgs),
    /// Proven radius bound and empirical radius estimate of the series.
    Radius(commands::RadiusArgs),
    /// Run the acceptance checks.
    Validate(commands::ValidateArgs),
}

/// How a command ended, beyond its report.
pub enum Outcome {
    Ok,
    /// A check failed or an iteration did not converge.
    Failed(String),
}

pub enum CliError {
    Usage(String),
    Failure(String),
}

impl From<ar1_persistence::Error> for CliError {
    fn from(e: ar1_persistence::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Failure(e.to_string())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {threads} threads: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    configure_threads()?;
    let (report, format, outcome) = match cli.command {
        Command::Coeffs(args) => commands::coeffs(&args)?,
        Command::Lambda(args) => commands::lambda(&args)?,
        Command::Persistence(args) => commands::persistence(&args)?,
        Command::Radius(args) => commands::radius(&args)?,
        Command::Validate(args) => commands::validate(&args)?,
    };
    report
        .emit(format)
        .map_err(|e| CliError::Failure(format!("cannot write output: {e}")))?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed(msg)) => {
            eprintln!("ar1persist: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("ar1persist: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("ar1persist: error: {msg}");
            ExitCode::from(2)
        }
    }
}
