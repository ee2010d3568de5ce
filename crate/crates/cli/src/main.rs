use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use mvabo_cli::config::parse_seeds;
use mvabo_cli::runner::resolve_output_dir;
use mvabo_cli::{aggregate_dir, plot, run, ExperimentConfig, Summary};

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\nprofile: ",
    env!("MVABO_BUILD_PROFILE"),
    "\ntarget: ",
    env!("MVABO_BUILD_TARGET"),
);

#[derive(Parser)]
#[command(name = "mvabo", version, long_version = LONG_VERSION, about = "Mean-variance Bayesian optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration over its seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds overriding the config (`a..b` for a range).
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Rebuild the summary of a run directory from its traces.
    Aggregate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the long-format plot table of one or more summaries.
    EmitPlotData {
        #[arg(long = "in", required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            seeds,
            out,
            workers,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seeds {
                cfg.seeds = parse_seeds(&s).context("--seeds")?;
            }
            let out_dir = resolve_output_dir(&cfg, out.as_deref());
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let report = run(&cfg, &out_dir, workers)?;
            println!(
                "{} of {} seeds completed; outputs in {}",
                report.completed.len(),
                cfg.seeds.len(),
                report.out_dir.display()
            );
            if report.failures.is_empty() {
                return Ok(ExitCode::SUCCESS);
            }
            for (seed, msg) in &report.failures {
                eprintln!("seed {seed} failed: {msg}");
            }
            Ok(ExitCode::FAILURE)
        }
        Command::Aggregate { input, out } => {
            let summary = aggregate_dir(&input)?;
            std::fs::write(&out, summary.to_text()).with_context(|| format!("writing {}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::EmitPlotData { input, out } => {
            let summaries = input.iter().map(|p| Summary::load(p)).collect::<Result<Vec<_>>>()?;
            let rows = plot::plot_rows(&summaries)?;
            std::fs::write(&out, plot::to_csv(&rows)).with_context(|| format!("writing {}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
