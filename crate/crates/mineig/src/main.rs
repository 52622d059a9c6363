use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mineig::config::{parse_discretization, RunConfig};
use mineig::{execute, write_report, CliError, Command};

/// Eigenvalue experiments for -Δ + αF(κ) on flat circles and tori.
#[derive(Debug, Parser)]
#[command(name = "mineig", version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Command,
    /// Plain-text `key = value` configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for `<command>.csv` and `summary.json`.
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    /// Seed for every random choice; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// `fourier` or `fd2`; overrides the config.
    #[arg(long)]
    discretization: Option<String>,
    /// Record wall-clock seconds per phase (output is then not reproducible).
    #[arg(long)]
    timings: bool,
    /// Suppress the one-line status report.
    #[arg(long)]
    quiet: bool,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::from_file(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.override_seed(s);
    }
    if let Some(d) = &cli.discretization {
        cfg.override_discretization(parse_discretization(d)?);
    }
    let report = execute(cli.command, &cfg, cli.timings)?;
    let (csv, json) = write_report(&report, &cli.out)?;
    if !cli.quiet {
        let verdict = if report.summary.all_pass() {
            "all invariants pass"
        } else {
            "some invariants FAIL"
        };
        println!(
            "{}: {} ({}, {})",
            cli.command.name(),
            verdict,
            csv.display(),
            json.display()
        );
    }
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mineig: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
