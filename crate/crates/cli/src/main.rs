//! Command-line front end for the light-cone surface toolkit.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical degeneracy or a
//! failed check, 4 more than half of the lattice masked.

mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Overrides;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn config(e: lightcone::Error) -> Self {
        CliError::Config(e.to_string())
    }

    fn io(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "lightcone", version, about = "Moebius invariants of surfaces in the light-cone model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frame, structure-equation and Willmore residuals of one chart.
    Invariants(Overrides),
    /// Pair invariants theta and rho of two surfaces.
    Pair(Overrides),
    /// Adjoint transform with duality diagnostics and surface export.
    Adjoint(Overrides),
    /// Harmonicity and energy of the point-pair map.
    Pairmap(Overrides),
    /// Randomized check of left/right touch against theta and rho.
    QuatCheck(Overrides),
    /// Condensed regression suite over the chart catalog.
    VerifyAll(Overrides),
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (name, o) = match &cli.command {
        Command::Invariants(o) => ("invariants", o),
        Command::Pair(o) => ("pair", o),
        Command::Adjoint(o) => ("adjoint", o),
        Command::Pairmap(o) => ("pairmap", o),
        Command::QuatCheck(o) => ("quat-check", o),
        Command::VerifyAll(o) => ("verify-all", o),
    };
    let cfg = config::load(o)?;
    let report = match name {
        "invariants" => commands::invariants(&cfg)?,
        "pair" => commands::pair(&cfg)?,
        "adjoint" => commands::adjoint(&cfg)?,
        "pairmap" => commands::pairmap(&cfg)?,
        "quat-check" => commands::quat_check(&cfg)?,
        _ => commands::verify_all(&cfg)?,
    };
    report.emit()?;
    if commands::failed_checks(&report) {
        eprintln!("{name}: checks failed");
        return Ok(3);
    }
    if report.masked_fraction() > 0.5 {
        eprintln!(
            "warning: {} of {} sites masked",
            report.masked, report.sites
        );
        return Ok(4);
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
