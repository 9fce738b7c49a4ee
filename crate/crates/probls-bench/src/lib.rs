//! Benchmark harness for the probabilistic line search: configure runs,
//! sweep initial learning rates across optimizer modes, aggregate over
//! seeds, and persist traces (CSV) and summaries (JSON).

pub mod commands;
pub mod config;
pub mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Process exit codes: 0 success, 2 configuration error, 3 I/O error,
/// 4 numerical failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "probls-bench", about = "Line-search SGD benchmark harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment from a JSON config (flags override fields).
    Run(RunArgs),
    /// Run a learning-rate sweep with replications and aggregate the results.
    Sweep(SweepArgs),
    /// Generate a synthetic classification dataset as CSV.
    GenData(GenDataArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated initial learning rates.
    #[arg(long)]
    pub alphas: String,
    #[arg(long)]
    pub reps: usize,
    /// Comma-separated optimizer modes; defaults to the config's mode.
    #[arg(long)]
    pub modes: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub classes: usize,
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub dims: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub separation: f64,
}

/// Parses `argv` and dispatches; returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/usage text
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Run(args) => commands::cmd_run(&args).map(|_| ()),
        Command::Sweep(args) => commands::cmd_sweep(&args).map(|_| ()),
        Command::GenData(args) => commands::cmd_gen_data(&args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
