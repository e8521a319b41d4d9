//! `m3t`: train motion tokenizers, convert between motion and token files,
//! report codebook statistics, fit pose sequences and evaluate outputs.

mod args;
mod commands;
mod files;
mod jobs;

use std::process::ExitCode;

use clap::Parser;
use m3t_core::Error;

use args::{Cli, Command};

/// 2 for anything the caller can fix, 3 when a computation went non-finite.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Numeric(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => commands::train(&cli.global, a),
        Command::Tokenize(a) => commands::tokenize(&cli.global, a),
        Command::Detokenize(a) => commands::detokenize(a),
        Command::Stats(a) => commands::stats(a),
        Command::Fit(a) => commands::fit(a),
        Command::Eval(a) => commands::eval(&cli.global, a),
        Command::GenFixtures(a) => commands::gen_fixtures(&cli.global, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("m3t: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
