//! Batch driver for the `lmg` binary. Every subcommand writes its tables
//! (CSV with `#` metadata lines, or JSON) plus a `<stem>.manifest.json`
//! describing the run.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.

use std::ffi::OsString;

use clap::{Parser, Subcommand};
use lmg_core::LmgError;

mod commands;
pub mod config;
pub mod output;

pub use config::{Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "lmg", version, about = "Spectra, phase-space and quench numerics for the anisotropic LMG model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Both parity spectra at one coupling
    Spectrum(RunConfig),
    /// Spectral flow over a γx grid at fixed γy/γx
    Sweep(RunConfig),
    /// Predicted crossing couplings, optionally with located gap minima
    Crossings(RunConfig),
    /// Semiclassical density of states against the quantum levels
    Dos(RunConfig),
    /// Coupling sector, critical energies and fixed points
    Classify(RunConfig),
    /// Husimi density of an eigenstate or an evolved coherent state
    Husimi(RunConfig),
    /// Monte Carlo Wehrl entropies over a γ sweep or an energy window
    Wehrl(RunConfig),
    /// Quantum and truncated-Wigner quench dynamics
    Dynamics(RunConfig),
}

impl Command {
    fn split(self) -> (&'static str, RunConfig) {
        match self {
            Command::Spectrum(c) => ("spectrum", c),
            Command::Sweep(c) => ("sweep", c),
            Command::Crossings(c) => ("crossings", c),
            Command::Dos(c) => ("dos", c),
            Command::Classify(c) => ("classify", c),
            Command::Husimi(c) => ("husimi", c),
            Command::Wehrl(c) => ("wehrl", c),
            Command::Dynamics(c) => ("dynamics", c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: ErrorKind,
    pub stage: &'static str,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        Self { kind: ErrorKind::Config, stage: "config", message }
    }

    pub fn io(stage: &'static str, message: String) -> Self {
        Self { kind: ErrorKind::Numerical, stage, message }
    }

    pub fn from_core(stage: &'static str, e: LmgError) -> Self {
        let kind = match e {
            LmgError::NoConvergence { .. }
            | LmgError::StepUnderflow { .. }
            | LmgError::EnsembleFailure { .. }
            | LmgError::NoTrajectory(_) => ErrorKind::Numerical,
            _ => ErrorKind::Config,
        };
        let stage = if kind == ErrorKind::Config { "config" } else { stage };
        Self { kind, stage, message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (stage: {})", self.message, self.stage)
    }
}

impl std::error::Error for CliError {}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit code; diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, flags) = cli.command.split();
    let config = match RunConfig::resolve(flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("lmg {name}: {e}");
            return e.exit_code();
        }
    };
    let mut session = output::Session::new(name, config);
    let result = commands::dispatch(&mut session).and_then(|products| session.finish(products));
    match result {
        Ok(()) => 0,
        Err(e) => {
            session.fail(&e);
            eprintln!("lmg {name}: {e}");
            e.exit_code()
        }
    }
}
