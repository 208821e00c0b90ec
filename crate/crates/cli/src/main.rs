#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod container;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use config::{RunConfig, SolverKind};
use error::{CliError, Result};

#[derive(Parser, Debug)]
#[command(name = "dtb", version, about = "Reduced order models and the Data-to-Born transform for array data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print a summary of each step to stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    Spectral,
    Fdtd,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate array data for the configured medium.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_enum)]
        solver: Option<SolverArg>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Build the ROM of a data container and write a JSON report.
    Rom {
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        /// Use the block construction even for single-sensor data.
        #[arg(long)]
        mimo: bool,
    },
    /// Apply the Data-to-Born transform against the configured reference.
    Dtb {
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Estimate impedance ratios from the ROM coefficients.
    Invert {
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        mimo: bool,
    },
    /// Reverse-time migration image of the scattered part of the data.
    Image {
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant checks for a configuration and emit a JSON report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &Path, n: Option<usize>, tau: Option<f64>, seed: Option<u64>) -> Result<RunConfig> {
    let mut config = RunConfig::load(path)?;
    if let Some(n) = n {
        config.n = n;
    }
    if let Some(tau) = tau {
        config.tau = tau;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("DTB_THREADS") else {
        return Ok(());
    };
    let threads: usize =
        value.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
            CliError::validation("DTB_THREADS", format!("expected a positive integer, got {value:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::validation("DTB_THREADS", e.to_string()))
}

fn note(verbose: bool, what: &str, value: &Value) {
    if verbose {
        eprintln!("{what}: {value}");
    }
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let verbose = cli.verbose;
    match cli.command {
        Command::Simulate { config, out, n, tau, solver, seed } => {
            let mut config = load(&config, n, tau, seed)?;
            if let Some(s) = solver {
                config.solver = match s {
                    SolverArg::Spectral => SolverKind::Spectral,
                    SolverArg::Fdtd => SolverKind::Fdtd,
                };
            }
            let data = commands::cmd_simulate(&config, &out)?;
            note(verbose, "simulate", &serde_json::json!({ "m": data.m(), "frames": data.two_n(), "tau": data.tau() }));
        }
        Command::Rom { data, out, n, mimo } => {
            let report = commands::cmd_rom(&data, n, mimo, &out)?;
            note(verbose, "rom data-match residual", &report["data_match_residual"]);
        }
        Command::Dtb { data, config, out, n } => {
            let config = load(&config, None, None, None)?;
            let summary = commands::cmd_dtb(&data, &config, n, &out)?;
            note(verbose, "dtb", &summary);
        }
        Command::Invert { data, config, out, n, mimo } => {
            let config = load(&config, None, None, None)?;
            let summary = commands::cmd_invert(&data, &config, n, mimo, &out)?;
            note(verbose, "invert", &summary);
        }
        Command::Image { data, config, out } => {
            let config = load(&config, None, None, None)?;
            let report = commands::cmd_image(&data, &config, &out)?;
            note(verbose, "image", &report);
        }
        Command::Verify { config, out, n, tau, seed } => {
            let config = load(&config, n, tau, seed)?;
            let (report, failed) = commands::cmd_verify(&config)?;
            let text = serde_json::to_string_pretty(&report).expect("JSON values serialize") + "\n";
            match out {
                Some(path) => container::write_atomic(&path, text.as_bytes())?,
                None => print!("{text}"),
            }
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
