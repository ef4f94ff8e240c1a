//! `trt` command-line driver.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use trt_core::runner::{cfl_report, run_dt, run_simulation, sweep};
use trt_core::{parse_config, RunConfig, Scheme};

#[derive(Debug, Parser)]
#[command(
    name = "trt",
    version,
    about = "Gray thermal radiative transfer in slab geometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scheme and write history.csv and profiles.csv
    Run { config: PathBuf },
    /// Print the energy-stable step size and the node attaining it
    Cfl { config: PathBuf },
    /// Run several schemes on the same scenario and compare final profiles
    Sweep {
        config: PathBuf,
        /// Comma-separated scheme names
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "full,bug_fixed,bug_adaptive,rosseland"
        )]
        schemes: Vec<Scheme>,
        /// Run the schemes on separate threads
        #[arg(long)]
        parallel: bool,
    },
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("parsing {}", path.display()))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cfl { config } => {
            let cfg = load(&config)?;
            let cfl = cfl_report(&cfg)?;
            println!("dt = {}", cfl.dt);
            println!("node = {}", cfl.node);
        }
        Command::Run { config } => {
            let cfg = load(&config)?;
            let cfl = cfl_report(&cfg)?;
            println!("cfl dt = {}", cfl.dt);
            println!("dt = {}", run_dt(&cfg, &cfl));
            let summary = run_simulation(&cfg)?;
            let violations = summary
                .output
                .history
                .iter()
                .filter(|r| r.cfl_violation)
                .count();
            if violations > 0 {
                eprintln!("warning: {violations} steps exceed the stable step size");
            }
            println!("wrote {}", summary.history_path.display());
            println!("wrote {}", summary.profiles_path.display());
        }
        Command::Sweep {
            config,
            schemes,
            parallel,
        } => {
            let cfg = load(&config)?;
            let rows = sweep(&cfg, &schemes, parallel)?;
            for r in &rows {
                println!(
                    "{} vs {}: T {:e}, Phi {:e}",
                    r.scheme_a, r.scheme_b, r.l2_rel_t, r.l2_rel_phi
                );
            }
            println!("wrote {}", cfg.output_dir.join("comparison.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
