//! `radial`: admissibility checks, embedding constants, Galerkin solutions
//! and geometry tables for the weighted Hamiltonian system.
//!
//! Exit codes: 0 success, 1 inadmissible parameters, 2 parse or usage error,
//! 3 numerical non-convergence, 4 no nontrivial solution found.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use radial_core::Error;

use args::{Cli, Command};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INADMISSIBLE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_EMPTY: u8 = 4;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::EmptyFeasibleInterval { .. } => EXIT_INADMISSIBLE,
        Error::Parse(_) | Error::InvalidArgument(_) | Error::Io(_) => EXIT_PARSE,
        Error::NotConverged(_) | Error::IllConditioned(_) | Error::TailNotDecayed { .. } | Error::GridMismatch(_) => {
            EXIT_NOT_CONVERGED
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: thread pool: {err}");
            return ExitCode::from(EXIT_PARSE);
        }
    }
    let result = match &cli.command {
        Command::Check(a) => commands::check(a),
        Command::Embed(a) => commands::embed(&cli.global, a),
        Command::Solve(a) => commands::solve(&cli.global, a),
        Command::Geometry(a) => commands::geometry(&cli.global, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
