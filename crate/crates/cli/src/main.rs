//! `sfrc` — experiment runner for the short fiber-reinforced composite
//! toolkit: analytical sweeps, microstructure generation, finite-element
//! homogenization studies, correlation analysis, and the acceptance
//! suite, with reproducible seeded runs and manifested outputs.

mod commands;
mod config;
mod manifest;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use std::path::PathBuf;
use std::process::ExitCode;

/// Errors split by exit code: usage/config problems exit 2, runtime
/// failures (generation jamming, singular systems, I/O) exit 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<sfrc_core::Error> for CliError {
    fn from(e: sfrc_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "sfrc",
    version,
    about = "Apparent elastic properties of short fiber-reinforced composites"
)]
struct Cli {
    /// TOML configuration file; command-line flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed for every random stream of the run.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads (default: all available cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Output directory (environment variable SFRC_OUT overrides this).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Plane state of every 2D analysis.
    #[arg(long, global = true, value_parser = ["plane-stress", "plane-strain"])]
    state: Option<String>,

    /// Window edge length for single-window commands [um].
    #[arg(long = "window-um", global = true, value_name = "N")]
    window_um: Option<u32>,

    /// Monte Carlo realization count.
    #[arg(long, global = true, value_name = "N")]
    realizations: Option<usize>,

    /// Restrict `verify` to the fast criterion subset.
    #[arg(long, global = true)]
    quick: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytical micromechanics: constants table or parameter sweep.
    Analytic {
        /// Micromechanics model: tandon-weng or halpin-tsai.
        #[arg(long, value_parser = ["tandon-weng", "halpin-tsai"])]
        model: Option<String>,
        /// Parameter to sweep: length, diameter, orientation, or
        /// volume-fraction; omitted emits the constants table.
        #[arg(long)]
        vary: Option<String>,
        /// Sample count for random sweeps.
        #[arg(long, value_name = "N")]
        samples: Option<usize>,
    },
    /// Generates one random fiber microstructure and a summary.
    Microgen,
    /// Mean apparent coefficients across element sizes.
    Elementsize,
    /// Scenario influence study: mean/std per scenario, window, and
    /// boundary-condition kind.
    Influence,
    /// Moving-window ensemble and correlation curves (resumable).
    Corr,
    /// Acceptance criterion suite.
    Verify,
}

/// Everything a command needs: merged configuration and output directory.
pub struct Ctx {
    pub config: ExperimentConfig,
    pub out: PathBuf,
}

fn build_ctx(cli: &Cli) -> Result<Ctx, CliError> {
    let mut config = ExperimentConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if let Some(workers) = cli.workers {
        config.run.workers = workers;
    }
    if let Some(out) = &cli.out {
        config.run.out = out.display().to_string();
    }
    if let Some(state) = &cli.state {
        config.run.state = state.clone();
    }
    if let Some(w) = cli.window_um {
        config.run.window_um = w;
    }
    if let Some(r) = cli.realizations {
        config.run.realizations = r;
    }
    if let Ok(out) = std::env::var("SFRC_OUT") {
        if !out.is_empty() {
            config.run.out = out;
        }
    }
    config.state()?;
    if config.run.realizations == 0 {
        return Err(CliError::Usage("realizations must be positive".into()));
    }
    let out = PathBuf::from(&config.run.out);
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Runtime(format!("output directory {}: {e}", out.display())))?;
    if config.run.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.run.workers)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("worker pool: {e}")))?;
    }
    Ok(Ctx { config, out })
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let ctx = build_ctx(&cli)?;
    match &cli.command {
        Command::Analytic {
            model,
            vary,
            samples,
        } => {
            commands::analytic::run(&ctx, model.as_deref(), vary.as_deref(), *samples)?;
            Ok(0)
        }
        Command::Microgen => {
            commands::microgen::run(&ctx)?;
            Ok(0)
        }
        Command::Elementsize => {
            commands::elementsize::run(&ctx)?;
            Ok(0)
        }
        Command::Influence => {
            commands::influence::run(&ctx)?;
            Ok(0)
        }
        Command::Corr => {
            commands::corr::run(&ctx)?;
            Ok(0)
        }
        Command::Verify => commands::verify::run(&ctx, cli.quick),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
