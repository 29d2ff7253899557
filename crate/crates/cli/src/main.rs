mod args;
mod commands;
mod config;
mod error;
mod table;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::config::{merged_args, MergeError};
use crate::error::Error;

fn fail(tag: &str, message: &str, code: u8) -> ExitCode {
    let message = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error[{tag}]: {message}");
    ExitCode::from(code)
}

fn clap_failure(e: clap::Error) -> ExitCode {
    use clap::error::ErrorKind;
    if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
        print!("{e}");
        return ExitCode::SUCCESS;
    }
    let text = e.to_string();
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("invalid arguments");
    fail("usage", first.trim_start_matches("error: "), 2)
}

fn cli_failure(e: Error) -> ExitCode {
    fail(e.tag(), &e.to_string(), e.exit_code() as u8)
}

fn main() -> ExitCode {
    let argv = match merged_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(MergeError::Clap(e)) => return clap_failure(e),
        Err(MergeError::Cli(e)) => return cli_failure(e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => return clap_failure(e),
    };
    let text = match commands::run(&cli) {
        Ok(t) => t,
        Err(e) => return cli_failure(e),
    };
    let written = match &cli.output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Error::io(path.display().to_string(), e))
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("stdout", e)),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => cli_failure(e),
    }
}
