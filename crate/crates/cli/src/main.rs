//! `fh-outage` — outage-capacity tables for frequency-hopped spectrum
//! sharing.
//!
//! Reads a flat `key=value` configuration, runs one of six commands, and
//! writes a CSV table to `--out` (or stdout). Exit codes: 0 success,
//! 1 I/O failure, 2 malformed configuration or invalid parameters,
//! 3 solver non-convergence, 4 validation failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use commands::{CliError, Session};
use config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CommandKind {
    /// Single FH ε-outage-capacity solve.
    Capacity,
    /// FH capacity across the configured ε grid.
    SweepEps,
    /// FH capacity for every v ∈ {1, …, u}.
    SweepV,
    /// FH capacity across the configured SNR grid (dB).
    SweepSnr,
    /// v-maximized FH bound 1 vs the FBS and FD baselines over the ε grid.
    Compare,
    /// Oracle-equivalence and invariant suite (exit 4 on any FAIL).
    Validate,
}

/// Outage-capacity lower bounds for randomized frequency hopping, with
/// frequency-division and full-band-spreading baselines and a Monte Carlo
/// validation suite. Emits CSV.
#[derive(Debug, Parser)]
#[command(name = "fh-outage", version)]
struct RunSpec {
    /// Which table to compute.
    #[arg(long, value_enum)]
    command: CommandKind,

    /// Path to the key=value run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Base seed for every Monte Carlo stream of the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Overrides both `psi_samples` and `mc_samples` from the config.
    #[arg(long)]
    samples: Option<u64>,
}

fn emit(out: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}

fn run(spec: &RunSpec) -> Result<(), u8> {
    let text = std::fs::read_to_string(&spec.config).map_err(|e| {
        eprintln!(
            "config error: cannot read {}: {e}",
            spec.config.display()
        );
        2u8
    })?;
    let cfg = RunConfig::parse(&text).map_err(|e| {
        eprintln!("{e}");
        2u8
    })?;
    let session = Session::new(cfg, spec.seed, spec.samples);

    let produced = match spec.command {
        CommandKind::Capacity => commands::capacity(&session).map(|csv| (csv, 0)),
        CommandKind::SweepEps => commands::sweep_eps(&session).map(|csv| (csv, 0)),
        CommandKind::SweepV => commands::sweep_v(&session).map(|csv| (csv, 0)),
        CommandKind::SweepSnr => commands::sweep_snr(&session).map(|csv| (csv, 0)),
        CommandKind::Compare => commands::compare(&session).map(|csv| (csv, 0)),
        CommandKind::Validate => commands::validate(&session),
    };
    let (csv, failed) = produced.map_err(|e| {
        eprintln!("{e}");
        match e {
            CliError::Config(_) => 2u8,
            CliError::Lib(fh_outage::Error::NonConvergence { .. }) => 3,
            CliError::Lib(_) => 2,
            CliError::Validation { .. } => 4,
        }
    })?;

    emit(spec.out.as_ref(), &csv).map_err(|e| {
        eprintln!("output error: {e}");
        1u8
    })?;

    if failed > 0 {
        eprintln!("{}", CliError::Validation { failed });
        return Err(4);
    }
    Ok(())
}

fn main() -> ExitCode {
    let spec = RunSpec::parse();
    match run(&spec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
