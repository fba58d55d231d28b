//! `seceval` — batch evaluation harness for code-generating models.
//!
//! Subcommands: `evaluate` (full grid), `scan` (detectors on files),
//! `simulate` (agent episodes), `stats` (ANOVA/Tukey/fits), `report`
//! (re-emit from a results bundle). Exit codes: 0 success, 1 validation
//! error, 2 runtime failure.

mod commands;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "seceval", version, about = "Security and reliability evaluation for code-generating models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full evaluation grid from a run-config file.
    Evaluate(commands::EvaluateArgs),
    /// Scan source files or directories for vulnerabilities and hallucinations.
    Scan(commands::ScanArgs),
    /// Run agent-simulation episodes from an episode config.
    Simulate(commands::SimulateArgs),
    /// Statistical analysis of a metrics CSV.
    Stats(commands::StatsArgs),
    /// Re-emit report files from an existing results bundle.
    Report(commands::ReportArgs),
}

/// Restore the default SIGPIPE disposition so piping into `head` or a
/// closed pager terminates quietly instead of panicking on write.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let result = match cli.command {
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Scan(args) => commands::scan(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Stats(args) => commands::stats(args),
        Command::Report(args) => commands::report(args),
    };

    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(if e.is_validation() { 1 } else { 2 });
        }
    }
}
