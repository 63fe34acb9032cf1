//! `y00lab`: workbench for the Y-00 coherent-state cipher.
//!
//! Exit codes: 0 on success, 2 on usage/configuration errors, 3 on runtime
//! failures (I/O and the like).

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::fmt;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "y00lab",
    version,
    about = "Simulate Y-00 sessions, mount the intercept-resend attack, and run the classical cryptanalysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an honest session and write its transcript
    Simulate(config::RunArgs),
    /// Run an attacked session; report the keystream relation and Bob's
    /// error counts with and without Eve (paired seeds)
    Attack(config::RunArgs),
    /// Sweep the mean photon number and write error rates as CSV
    SweepAlpha(config::SweepArgs),
    /// Recover the secret key from Eve's record by exhaustive search
    RecoverKey(config::RecoverArgs),
    /// Compare Bob's bit-error rates with and without the attack
    Ber(config::RunArgs),
    /// Print the wheel geometry: seams, classes, fluctuation, cut overlap
    WheelAudit(config::AuditArgs),
}

/// Error split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<y00_core::Error> for CliError {
    fn from(err: y00_core::Error) -> Self {
        match err {
            y00_core::Error::Io(_) | y00_core::Error::Json(_) => CliError::Runtime(err.to_string()),
            _ => CliError::Usage(err.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Attack(args) => commands::attack(args),
        Command::SweepAlpha(args) => commands::sweep_alpha(args),
        Command::RecoverKey(args) => commands::recover_key(args),
        Command::Ber(args) => commands::ber(args),
        Command::WheelAudit(args) => commands::wheel_audit(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
