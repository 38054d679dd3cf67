use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polariton_cli::commands;
use polariton_cli::config::ExperimentConfig;
use polariton_cli::CliError;

#[derive(Parser)]
#[command(name = "polariton", version, about = "Polariton condensate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML experiment configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for the optional initial noise.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Branch energies, kinetic symbols and inverse mass versus k.
    Dispersion,
    /// Time evolution, or a pump-wavevector sweep when [sweep] is set.
    Evolve,
    /// Plane-wave density branches over a pump-amplitude sweep.
    Planewave,
    /// Linear-response maps over the k plane.
    Response,
    /// Invariant suite; exits 1 if any check fails.
    Selftest,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let report = match cli.command {
        Command::Dispersion => commands::dispersion(&cfg, &cli.out)?,
        Command::Evolve => commands::evolve_command(&cfg, &cli.out, cli.seed)?,
        Command::Planewave => commands::planewave(&cfg, &cli.out)?,
        Command::Response => commands::response(&cfg, &cli.out)?,
        Command::Selftest => return commands::selftest(std::io::stdout()),
    };
    println!("{report}");
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
