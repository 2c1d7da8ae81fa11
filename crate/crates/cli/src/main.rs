//! `twophoton`: spectra, Peres lattices, level statistics and Poincaré
//! sections of the two-photon Dicke model, written as CSV with a JSON
//! manifest per run.

mod commands;
mod error;
mod options;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::CliError;
use options::{resolve, Options};

#[derive(Debug, Parser)]
#[command(name = "twophoton", version, about = "Two-photon Dicke model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Converged eigenvalues per parity sector.
    Spectrum(Options),
    /// Expectation-value lattices, optionally with analytic overlays.
    Peres(Options),
    /// Windowed mean spacing ratio per sector and averaged.
    Ratio(Options),
    /// Unfolded spacing histogram and Anderson-Darling fits in an energy window.
    Spacing(Options),
    /// Poincaré sections of the classical limit on the energy shell.
    Poincare(Options),
    /// Compare the zero-splitting spectrum with the Bogoliubov formula.
    IntegrableCheck(Options),
    /// Rerun a manifest and verify byte-identical outputs.
    Replay {
        manifest: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    let (name, opts) = match cli.command {
        Command::Replay { manifest, out_dir } => return commands::replay(&manifest, &out_dir),
        Command::Spectrum(o) => ("spectrum", o),
        Command::Peres(o) => ("peres", o),
        Command::Ratio(o) => ("ratio", o),
        Command::Spacing(o) => ("spacing", o),
        Command::Poincare(o) => ("poincare", o),
        Command::IntegrableCheck(o) => ("integrable-check", o),
    };
    commands::dispatch(name, &resolve(opts)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(manifest) => {
            log::info!("manifest {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
