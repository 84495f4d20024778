//! `smwave`: command-line front end for the smwave-core library.
//!
//! Exit codes: 0 success, 2 configuration or validation error, 3 numerical
//! nonconvergence, 4 I/O error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use smwave_core::wave::DalembertSign;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] smwave_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use smwave_core::Error as E;
        match self {
            CliError::Io(_) | CliError::Core(E::Io(_)) => 4,
            CliError::Core(E::NonConvergence { .. } | E::StudyFailed { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "smwave",
    version,
    about = "Stochastic measures, Fourier sums and the stochastic wave equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` and the study's `root_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Existing directory receiving the CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use the minus sign between travelling waves in the d'Alembert part.
    #[arg(long, global = true)]
    minus_sign: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Sample a measure path and write path.csv.
    Generate,
    /// Write path.csv and its Fourier coefficients to expansion.csv.
    Expand,
    /// Solve once and write field.csv.
    Solve,
    /// Run a Monte Carlo convergence study: report.csv, raw.csv.
    Converge,
    /// Deterministic rate table rate.csv, optionally with a study.
    Rate,
}

fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut config = RunConfig::load(config_path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
        if let Some(study) = config.study.as_mut() {
            study.root_seed = seed;
        }
    }
    if cli.minus_sign {
        if let Some(problem) = config.problem.as_mut() {
            problem.sign = DalembertSign::Minus;
        }
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    if !out.is_dir() {
        return Err(CliError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("output directory {} does not exist", out.display()),
        )));
    }
    match cli.command {
        Command::Generate => commands::generate(&config, &out),
        Command::Expand => commands::expand_cmd(&config, &out),
        Command::Solve => commands::solve_cmd(&config, &out),
        Command::Converge => commands::converge(&config, &out),
        Command::Rate => commands::rate(&config, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(notes) => {
            for n in notes {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
