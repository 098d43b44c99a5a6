//! `anosov-lab`: runs JSON-configured experiments on anosov-core.
//!
//! Exit status: 0 when the run succeeds and its verdict holds, 2 when it
//! succeeds with a negative verdict, 1 on any error.

mod catalog;
mod config;
mod run;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "anosov-lab", version, about = "Batch experiments on Anosov representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its artifacts.
    Run {
        config: PathBuf,
        /// Override the ball radius.
        #[arg(long)]
        radius: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the shipped example configs.
    Examples,
}

/// Caps rayon's global pool at `ANOSOV_LAB_THREADS` when set.
fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("ANOSOV_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("ANOSOV_LAB_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")
}

fn run_config(path: PathBuf, radius: Option<usize>, out: Option<PathBuf>, seed: Option<u64>) -> Result<bool> {
    let mut config = config::load(&path)?;
    config.radius = radius.unwrap_or(config.radius);
    config.seed = seed.unwrap_or(config.seed);
    if out.is_some() {
        config.out = out;
    }
    let rep = config.validate().with_context(|| format!("{}: invalid config", path.display()))?;
    let summary = run::run(&config, &rep)?;
    println!(
        "{}: {} ({})",
        summary.name,
        summary.verdict.message,
        run::out_dir(&config).join("summary.json").display()
    );
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    Ok(summary.verdict.positive)
}

fn list_examples() {
    for e in &catalog::EXAMPLES {
        println!("{:<18} {}  [{}]", e.name, e.description, e.path().display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Run { config, radius, out, seed } => run_config(config, radius, out, seed),
        Command::Examples => {
            list_examples();
            Ok(true)
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
