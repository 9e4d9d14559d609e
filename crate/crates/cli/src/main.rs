//! `rcmap`: run mapping, benchmark and demon scenarios from a JSON config.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use fermionic_rc::scenario::{self, ScenarioConfig};
use fermionic_rc::spectral::write_chain_csv;

#[derive(Parser, Debug)]
#[command(name = "rcmap", version, about = "Fermionic reaction-coordinate scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON scenario config; defaults are used for missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for grid points (1 = sequential).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// One mapping step of the configured SD; writes `n,lambda,E`.
    MapSd,
    /// Iterated mapping of a compactly supported SD.
    Chain,
    /// Exact versus RC + master-equation SET currents over βΓ.
    BenchmarkSet,
    /// Demon parameter sweep along one axis.
    DemonSweep,
    /// All four demon models at one parameter point, as JSON.
    Report,
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Runs the command; `Ok(false)` when some grid points failed.
fn run(cli: &Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::from_path(path).with_context(|| format!("reading config {}", path.display()))?,
        None => ScenarioConfig::default(),
    };
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    if cfg.workers == Some(0) {
        anyhow::bail!("--workers must be at least 1");
    }
    let mut out = open_out(cfg.out.as_deref())?;
    let ok = match cli.command {
        Command::MapSd => {
            let level = scenario::run_map_sd(&cfg)?;
            log::info!("λ = {:e}, E = {:e}", level.coupling, level.energy);
            write_chain_csv(&mut out, std::slice::from_ref(&level))?;
            true
        }
        Command::Chain => {
            let levels = scenario::run_chain(&cfg)?;
            write_chain_csv(&mut out, &levels)?;
            true
        }
        Command::BenchmarkSet => {
            let rows = scenario::run_benchmark_set(&cfg)?;
            scenario::write_csv(&mut out, &rows)?;
            let failed = rows.iter().filter(|r| !r.solved()).count();
            if failed > 0 {
                log::error!("{failed} of {} grid points failed", rows.len());
            }
            failed == 0
        }
        Command::DemonSweep => {
            let rows = scenario::run_demon_sweep(&cfg)?;
            scenario::write_csv(&mut out, &rows)?;
            let failed = rows.iter().filter(|r| !r.solved()).count();
            if failed > 0 {
                log::error!("{failed} of {} grid points failed", rows.len());
            }
            failed == 0
        }
        Command::Report => {
            let report = scenario::run_report(&cfg)?;
            if !report.imbalance.consistent {
                log::warn!("{}", report.imbalance.note);
            }
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            report.all_solved()
        }
    };
    out.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
