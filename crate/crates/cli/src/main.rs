//! `cojump`: ingest tick data or simulate panels, decompose covariation into
//! continuous and co-jump parts, and build the event-study report.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "cojump", version, about = "Wavelet co-jump decomposition of intraday price panels")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, env = "COJUMP_CONFIG")]
    config: Option<PathBuf>,

    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Test size, overriding the config.
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Bootstrap replications, overriding the config.
    #[arg(long = "bootstrap-reps", global = true)]
    bootstrap_reps: Option<usize>,

    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse tick files into per-day return panels.
    Ingest,
    /// Simulate return panels from a scenario file.
    Simulate {
        /// Scenario file, overriding `[simulate] scenario`.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Detect jumps, estimate and test every day and pair.
    Decompose,
    /// Build event-study tables from decomposition outputs.
    Report,
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("no config: pass --config or set COJUMP_CONFIG".into()))?;
    let overrides = Overrides {
        seed: cli.seed,
        alpha: cli.alpha,
        replications: cli.bootstrap_reps,
        output: cli.output,
    };
    let mut config = RunConfig::load(&path, &overrides)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Ingest => commands::ingest(&mut config),
        Command::Simulate { scenario } => commands::simulate_cmd(&config, scenario.as_deref()),
        Command::Decompose => commands::decompose(&config),
        Command::Report => commands::report_cmd(&config),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.render().to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code())
        }
    }
}
