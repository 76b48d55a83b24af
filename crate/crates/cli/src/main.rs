//! `hkp`: batch front-end for the solver pipeline.
//!
//! Exit status: 0 on success, 1 when a computation or verification fails, 2 for
//! unusable input (bad flags, unreadable or malformed files).

mod config;
mod io;
mod solve;
mod tau;
mod verify;
mod wkb;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "hkp",
    version,
    about = "Exact dressing, WKB and tau computations for the hbar-dependent KP hierarchy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the dressing data X_0..X_N, alpha_0..alpha_N.
    Solve(solve::Args),
    /// Convert between the exponent X and the WKB phase S.
    Wkb(wkb::Args),
    /// Tau-function data from a WKB phase or a v-table.
    Tau(tau::Args),
    /// Recompute the built-in Kontsevich table and diff every entry.
    Verify(verify::Args),
}

/// How a command failed.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit 2.
    Input(String),
    /// The computation ran and found something wrong: exit 1.
    Compute(String),
}

impl From<hkp_core::Error> for Failure {
    fn from(e: hkp_core::Error) -> Self {
        match e {
            hkp_core::Error::Parse(p) => Failure::Input(p.to_string()),
            other => Failure::Compute(other.to_string()),
        }
    }
}

impl From<hkp_core::ParseError> for Failure {
    fn from(e: hkp_core::ParseError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve::run(a),
        Command::Wkb(a) => wkb::run(a),
        Command::Tau(a) => tau::run(a),
        Command::Verify(a) => verify::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

pub fn warn(msg: impl AsRef<str>) {
    eprintln!("warning: {}", msg.as_ref());
}
