//! `rank1` — command-line front end for the rank-one construction library.
//!
//! Subcommands: `build` (construct a schedule and write its JSON interchange
//! form), `verify` (run property verifiers, emit a JSON report), `correlate`
//! (bracket a single correlation), `sweep` (CSV/JSON correlation series),
//! and `coeffs` (joining coefficients).
//!
//! Exit codes: 0 when everything passes (or resolves exactly), 1 when a
//! verifier certifies a violation, 2 when some result stays indeterminate
//! without any failure, 64 for usage errors.

mod args;
mod cmd_build;
mod cmd_coeffs;
mod cmd_correlate;
mod cmd_sweep;
mod cmd_verify;
mod report;
mod sets;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::report::EXIT_USAGE;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Build(a) => cmd_build::run(a),
        Command::Verify(a) => cmd_verify::run(a),
        Command::Correlate(a) => cmd_correlate::run(a),
        Command::Sweep(a) => cmd_sweep::run(a),
        Command::Coeffs(a) => cmd_coeffs::run(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("rank1: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
