use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use qwalk::config::Format;
use qwalk::{exit_code, run, LoadedConfig, RunOptions, Verb};

/// Quantum walks of photon pairs in waveguide lattices.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// What to do with the experiment.
    #[arg(value_enum)]
    verb: Verb,
    /// Experiment description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the optimizer, robustness sweep and sampler.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Format of the correlation matrix.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write an 8-bit graymap of the correlation matrix.
    #[arg(long)]
    heatmap: bool,
    /// Like --heatmap, with logarithmic intensity scaling.
    #[arg(long)]
    log_heatmap: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<qwalk::RunReport> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = LoadedConfig::load(&cli.config)?;
    let opts = RunOptions::resolve(&cfg, cli.out.clone(), cli.seed, cli.format, cli.heatmap, cli.log_heatmap);
    run(cli.verb, &cfg, &opts)
}
