//! `valab`: batch runner for polytope valuation experiments.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::config::{ExperimentConfig, Overrides};
use crate::error::CliError;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    /// Face table with k-volumes and exterior-angle measures.
    Faces,
    /// φ_f of one polytope.
    Phi,
    /// Continuity probe along a convergent sequence.
    Probe,
    /// Cosine-transform multipliers and range diagnostics.
    Cosine,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Faces => "faces",
            Command::Phi => "phi",
            Command::Probe => "probe",
            Command::Cosine => "cosine",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "valab", version, about = "Weakly continuous polytope valuations from flag kernels")]
struct Args {
    command: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Seed for Monte Carlo integration.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo samples per face.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory (default: valab-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("VALAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("VALAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn run(args: &Args) -> Result<commands::Outcome, CliError> {
    init_threads()?;
    let ov = Overrides { seed: args.seed, samples: args.samples, out: args.out.clone() };
    let cfg = ExperimentConfig::load(&args.config, args.command.name(), &ov)?;
    match args.command {
        Command::Faces => commands::faces(&cfg),
        Command::Phi => commands::phi_cmd(&cfg),
        Command::Probe => commands::probe(&cfg),
        Command::Cosine => commands::cosine(&cfg),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("{}", serde_json::json!({ "warning": w }));
            }
            println!("{}", out.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
