use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pite_lab::{run_experiment, validate, ExperimentKind, LabError, ModeName, RunConfig};

#[derive(Parser)]
#[command(
    name = "pite-lab",
    version,
    about = "Run probabilistic imaginary-time evolution experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trajectory.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the measurement mode in the config.
        #[arg(long)]
        mode: Option<ModeName>,
    },
    /// List the available experiments.
    ListExperiments,
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path, seed: Option<u64>, mode: Option<ModeName>) -> Result<RunConfig, LabError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(mode) = mode {
        cfg.mode = mode;
    }
    Ok(cfg)
}

fn execute(command: Command) -> Result<(), LabError> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            mode,
        } => {
            let cfg = load(&config, seed, mode)?;
            for path in run_experiment(&cfg, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::ListExperiments => {
            for kind in ExperimentKind::ALL {
                println!("{:<14} {}", kind.name(), kind.describe());
            }
        }
        Command::Validate { config } => {
            let cfg = load(&config, None, None)?;
            validate(&cfg)?;
            println!("{}: ok ({})", config.display(), cfg.experiment);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pite-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
