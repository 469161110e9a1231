//! Command-line front end for the `dmdsal` detector.

pub mod commands;
pub mod config;
pub mod io;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

use commands::{BatchArgs, EvalArgs, SaliencyArgs};

#[derive(Debug, Parser)]
#[command(name = "dmdsal", version, about = "Salient region detection with dynamic mode decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Saliency map (and optional mask) for one image
    Saliency(SaliencyArgs),
    /// Maps and masks for every image in a directory, optionally evaluated
    Batch(BatchArgs),
    /// Score existing maps against ground-truth masks
    Eval(EvalArgs),
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { commands::EXIT_INPUT } else { commands::EXIT_OK };
        }
    };
    match &cli.command {
        Command::Saliency(a) => commands::cmd_saliency(a),
        Command::Batch(a) => commands::cmd_batch(a),
        Command::Eval(a) => commands::cmd_eval(a),
    }
}
