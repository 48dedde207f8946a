use std::path::PathBuf;
use std::process::ExitCode;

use burgers_fem::cli::{execute, Command, CliError};
use burgers_fem::config::RunConfig;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(version, about = "θ-scheme finite element solver for the boundary-controlled viscous Burgers equation")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run one simulation and write states, norms, controls and step reports.
    Simulate(RunArgs),
    /// Run a self-convergence study and write tableN.csv files.
    Convergence(RunArgs),
    /// Fit decay rates across a parameter sweep and write decay.csv.
    Decay(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Convergence(a) => (Command::Convergence, a),
        Sub::Decay(a) => (Command::Decay, a),
    };
    let result = RunConfig::load(args.config.as_deref(), &args.overrides)
        .map_err(CliError::Config)
        .and_then(|config| execute(command, &config));
    match result {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
