use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use diffusivity_cli::{parse_config, run, CliError, Command};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  other error (io, input file, model)
  2  configuration error
  3  flux data inconsistent with the model
  4  fixed point not converged (outputs are still written)
  5  finite-difference oracle check failed

Errors print one line to stderr: error[<category>]: <message>";

/// Recover a time-dependent diffusion coefficient from boundary flux data.
#[derive(Parser)]
#[command(name = "solve", version, after_help = EXIT_CODES)]
struct Cli {
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides io.out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override one config key, e.g. --set solver.tol=1e-10.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = parse_config(&cli.config, &cli.overrides)?;
    let out = cli.out.clone().unwrap_or_else(|| cfg.io.out.clone());
    let outcome = run(cli.command, &cfg, &out)?;
    for note in &outcome.notes {
        println!("{note}");
    }
    for file in &outcome.files {
        println!("wrote {}", file.display());
    }
    Ok(())
}
