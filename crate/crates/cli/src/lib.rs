//! `eigenrank` — ensemble-disagreement toolkit for binary segmentation:
//! training-subset selection, failure prediction, and the spectral
//! diagnostics behind them. The binary is a thin wrapper over this library;
//! file formats and the subprocess backend live here so they can be driven
//! directly by tests and embedders.

pub mod anybackend;
pub mod args;
pub mod commands;
pub mod error;
pub mod external;
pub mod manifest;
pub mod maskfile;
pub mod pgm;
pub mod report;

use clap::Parser;
use std::process::ExitCode;

/// Parse argv and run the selected command. Usage errors exit 2 (clap);
/// runtime failures print `error: <code>: <detail>` and return exit 1.
pub fn cli_main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}: {err}", err.code());
            ExitCode::from(1)
        }
    }
}
