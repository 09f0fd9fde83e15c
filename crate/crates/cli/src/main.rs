//! `arb` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or invalid input, 2 parse or I/O failure,
//! 3 numerical failure or degenerate parameters.

mod args;
mod commands;

use std::process::ExitCode;

use arb_core::{Error, ExecPolicy};
use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Input(_) | Error::Capability(_) => 1,
        Error::Parse { .. } | Error::Io { .. } => 2,
        Error::Numerical(_) | Error::Degenerate(_) => 3,
    }
}

/// Pins the worker pool and picks the matching execution policy.
fn configure_threads(threads: Option<usize>) -> Result<(ExecPolicy, usize), Error> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let threads = match threads {
        Some(0) => return Err(Error::Input("--threads must be at least 1".into())),
        Some(t) => t,
        None => available,
    };
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Input(format!("cannot start {threads} worker threads: {e}")))?;
    let policy = if threads == 1 || !cfg!(feature = "parallel") {
        ExecPolicy::Sequential
    } else {
        ExecPolicy::Parallel
    };
    Ok((policy, threads))
}

fn run(cli: Cli) -> Result<(), Error> {
    let (policy, threads) = configure_threads(cli.threads)?;
    match &cli.command {
        Command::Reconstruct(a) => commands::reconstruct(a, policy),
        Command::Evaluate(a) => commands::evaluate(a, policy),
        Command::Search(a) => commands::search(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Bench(a) => commands::bench(a, policy, threads),
        Command::Gen(a) => commands::gen(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
