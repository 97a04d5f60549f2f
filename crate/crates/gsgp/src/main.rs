use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gsgp::cli::{cmd_compare, cmd_datasets, cmd_run, load_spec};

#[derive(Parser)]
#[command(
    name = "gsgp",
    about = "Geometric semantic GP engine and benchmark harness for symbolic regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a batch of seeded runs described by a config file
    Run {
        /// Experiment config (TOML, or a previously written manifest.json)
        #[arg(long)]
        config: PathBuf,
        /// Override the number of runs per (dataset, variant)
        #[arg(long)]
        runs: Option<u32>,
        /// Override the base seed (run r uses seed + r)
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads across runs; 0 picks automatically
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Compare final-generation test fitness across variants in a run directory
    Compare {
        /// Directory containing runs.csv
        #[arg(long = "in")]
        input: PathBuf,
        /// Significance level for the printed dominance report
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
    /// Report per-dataset variable and instance counts
    Datasets {
        /// Dataset CSV files
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Optional name,variables,instances table to check against
        #[arg(long)]
        expect: Option<PathBuf>,
    },
}

fn real_main(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            runs,
            seed,
            out,
            threads,
        } => {
            let mut spec = load_spec(&config)?;
            if let Some(runs) = runs {
                spec.runs = runs;
            }
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            if let Some(out) = out {
                spec.out = out;
            }
            cmd_run(&spec, threads)
        }
        Command::Compare { input, alpha } => cmd_compare(&input, alpha),
        Command::Datasets { paths, expect } => cmd_datasets(&paths, expect.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
