//! Command-line driver: single runs and parameter scans.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fstokes::diagnostics::{criterion_report, lifespan_estimate};
use fstokes::harness::config::{parse_config_in, SimConfig};
use fstokes::harness::scan::{run_scan, ScanSpec, ScanVariable};
use fstokes::transport::{run, RunStatus};

#[derive(Parser)]
#[command(name = "fstokes", version, about = "Fractional Stokes-transport simulator on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides seed).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run one simulation per value of alpha or the initial amplitude.
    Scan {
        config: PathBuf,
        #[arg(long = "var")]
        variable: ScanVariable,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Concurrent rows; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn load(path: &Path, common: &Common) -> fstokes::Result<SimConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut config = parse_config_in(&text, path.parent())?;
    if let Some(out) = &common.out {
        config.output.dir = Some(out.clone());
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn execute(cli: Cli) -> fstokes::Result<ExitCode> {
    match cli.command {
        Command::Run { config, common } => {
            let config = load(&config, &common)?;
            let outcome = run(&config)?;
            let life = lifespan_estimate(&outcome.series);
            println!("status: {}", outcome.status.label());
            if let (Some(t), Some(trigger)) = (life.t_star_proxy, life.trigger) {
                println!("t_star_proxy: {t:.6} ({trigger})");
            }
            println!("{}", criterion_report(&outcome.series));
            if let Some(dir) = &config.output.dir {
                println!("output: {}", dir.display());
            }
            Ok(match outcome.status {
                RunStatus::Completed => ExitCode::SUCCESS,
                RunStatus::BlowupProxy | RunStatus::Diverged => ExitCode::from(2),
            })
        }
        Command::Scan {
            config,
            variable,
            values,
            workers,
            common,
        } => {
            let base = load(&config, &common)?;
            let table = run_scan(&ScanSpec {
                base,
                variable,
                values,
                workers,
            })?;
            println!("{table}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
