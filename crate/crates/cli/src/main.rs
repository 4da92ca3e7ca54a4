mod config;
mod output;
mod runs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crestwave::{Error, Exec};

use config::{parse_config, ConfigError, RunConfig};
use runs::Invocation;

#[derive(Parser)]
#[command(
    name = "crestwave",
    version,
    about = "Capillary-gravity water waves near a crest: runs, pair studies, sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one solution and log its energies.
    Simulate(Common),
    /// Run σ > 0 against σ = 0 from the same data and log 𝓔_Δ and F_Δ.
    Pair(Common),
    /// Pair runs over the (σ, ε) grid of the `[study]` block.
    Sweep(Common),
    /// Curvature, 𝓔_σ and M of mollified crests against ε.
    CrestScaling(Common),
    /// Parse and check a config, then print the resolved values.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 means one per core. Overrides `study.jobs`.
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for randomized initial data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] Error),
    #[error("i/o: {0}")]
    Io(std::io::Error),
    #[error("study incomplete: {0}")]
    Partial(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Partial(_) => 6,
            CliError::Io(_) => 1,
            CliError::Run(e) => match e.root() {
                Error::Cfl { .. } => 3,
                Error::Degenerate(_) | Error::TaylorSign(_) | Error::NonMonotone { .. } => 4,
                Error::NotHolomorphic { .. } => 5,
                Error::InvalidArgument(_) | Error::InvalidGrid(_) => 2,
                _ => 1,
            },
        }
    }
}

fn load(path: &PathBuf) -> Result<RunConfig, CliError> {
    let env: Vec<(String, String)> = std::env::vars().collect();
    Ok(parse_config(path, &env)?)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (common, run): (Common, fn(&RunConfig, &Invocation) -> Result<(), CliError>) = match cli
        .command
    {
        Command::ValidateConfig { config } => {
            let cfg = load(&config)?;
            let text = toml::to_string_pretty(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
            print!("{text}");
            return Ok(());
        }
        Command::Simulate(c) => (c, runs::simulate),
        Command::Pair(c) => (c, runs::pair),
        Command::Sweep(c) => (c, runs::sweep),
        Command::CrestScaling(c) => (c, runs::crest_scaling),
    };
    let cfg = load(&common.config)?;
    let jobs = common.jobs.unwrap_or(cfg.study.jobs);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    let inv = Invocation {
        out_dir: common.out.unwrap_or_else(|| cfg.output.directory.clone()),
        seed: common.seed,
        exec: if pool.current_num_threads() > 1 {
            Exec::Parallel
        } else {
            Exec::Sequential
        },
    };
    pool.install(|| run(&cfg, &inv))
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
