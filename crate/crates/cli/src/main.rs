mod args;
mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use mcm_core::Error;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Core(Error),
    /// A core error with a location prefix (file name, row).
    Context(String, Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 1 for usage, parse and I/O problems, 2 when a hard-margin problem is
    /// infeasible, 3 when the solver fails.
    fn exit_code(&self) -> u8 {
        let core = match self {
            CliError::Core(e) | CliError::Context(_, e) => e.root(),
            _ => return 1,
        };
        match core {
            Error::HardMarginInfeasible => 2,
            Error::SolverFailure(_) | Error::NotOptimal(_) | Error::IterationLimitExceeded { .. } => 3,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Context(c, e) => write!(f, "{c}: {e}"),
        }
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Cv(a) => commands::cv(a),
        Command::Grid(a) => commands::grid(a),
        Command::Inspect(a) => commands::inspect(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mcm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
