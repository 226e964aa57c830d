use anyhow::Result;
use clap::{Parser, Subcommand};
use decofield_cli::config::load_config;
use decofield_cli::runners;
use std::path::PathBuf;
use std::process::ExitCode;

/// Decoherence of a one-dimensional bosonic field: purity decay, initial
/// decay rates, heating rates, kernel tables, and QMC diagnostics.
#[derive(Parser)]
#[command(name = "decofield", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for the CSV + sidecar pair
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (affects speed, never results; 0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Override the scramble seed from the config
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Purity decay curve over a time grid
    PurityDecay,
    /// Initial purity decay rate vs superposition separation
    InitialRate,
    /// Heating rate: exact mode sum and closed form
    Energy,
    /// Kernel and diffusion-coefficient tables
    Kernels,
    /// Moment and equidistribution diagnostics of the point set
    QmcSelftest,
}

fn run(cli: &Cli) -> Result<()> {
    let config = cli
        .config
        .as_deref()
        .ok_or_else(|| anyhow::anyhow!("--config is required"))?;
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| anyhow::anyhow!("--out is required"))?;
    match cli.command {
        Command::PurityDecay => {
            runners::run_purity_decay(&load_config(config)?, out, cli.threads, cli.seed)?;
        }
        Command::InitialRate => {
            runners::run_initial_rate(&load_config(config)?, out, cli.threads, cli.seed)?;
        }
        Command::Energy => {
            runners::run_energy(&load_config(config)?, out, cli.threads)?;
        }
        Command::Kernels => {
            runners::run_kernels(&load_config(config)?, out, cli.threads)?;
        }
        Command::QmcSelftest => {
            runners::run_qmc_selftest(&load_config(config)?, out, cli.threads, cli.seed)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("decofield: {err:#}");
            ExitCode::FAILURE
        }
    }
}
