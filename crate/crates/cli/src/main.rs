use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use krylov_lab::{run, ConfigError, Experiment, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(name = "krylov-lab", version, about = "Krylov spread complexity experiments")]
struct Cli {
    /// Build generators with e^{+iHΔt} instead of e^{-iHΔt}.
    #[arg(long, global = true)]
    conjugate_generator: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Print the effective config with all defaults resolved.
    Validate { config: PathBuf },
    /// Randomized check that the unitary generator beats the Krylov basis.
    Theorem1 {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = krylov_lab::config::THEOREM1_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        tau_points: usize,
        #[arg(long, default_value = "out/theorem1")]
        output_dir: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        key: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    Ok(ExperimentConfig::parse(&text)?)
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Validate { config } => {
            let mut cfg = load(&config)?;
            cfg.conjugate_generator |= cli.conjugate_generator;
            print!("{}", cfg.to_config_string());
        }
        Command::Run { config } => {
            let mut cfg = load(&config)?;
            cfg.conjugate_generator |= cli.conjugate_generator;
            let summary = run(&cfg)?;
            println!("{}", serde_json::json!({ "status": "ok", "summary": summary }));
        }
        Command::Theorem1 { dim, trials, seed, tau_points, output_dir } => {
            let cfg = ExperimentConfig {
                dim,
                trials,
                seed,
                tau_points,
                output_dir,
                conjugate_generator: cli.conjugate_generator,
                ..ExperimentConfig::defaults(Experiment::Theorem1)
            };
            let summary = run(&cfg)?;
            println!("{}", serde_json::json!({ "status": "ok", "summary": summary }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
