use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nbmimo::capacity::{capacity_for_rate, capacity_points, write_capacity_csv};
use nbmimo::config::ConfigLayer;
use nbmimo::core::capacity::{DEFAULT_SEARCH_TRIALS, DEFAULT_TOL_DB, DEFAULT_TRIALS};
use nbmimo::sweep::Simulator;

/// BER/FER simulation of non-binary LDPC coded large-MIMO links.
#[derive(Parser)]
#[command(version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// TOML file with simulation settings; flags override it
    #[arg(long)]
    config: Option<PathBuf>,

    /// Write 0 for elapsed_s so reruns produce identical files
    #[arg(long)]
    no_timing: bool,

    #[command(flatten)]
    sim: ConfigLayer,
}

#[derive(Subcommand)]
enum Command {
    /// Ergodic capacity as CSV rows of gamma_db, mean, stderr
    Capacity(CapacityArgs),
}

#[derive(clap::Args)]
struct CapacityArgs {
    #[arg(long, default_value_t = 16)]
    nt: usize,
    /// Defaults to nt
    #[arg(long)]
    nr: Option<usize>,
    /// Comma-separated SNRs in dB
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required_unless_present = "target_rate")]
    snr: Vec<f64>,
    /// Find the SNR where capacity equals this many bps/Hz
    #[arg(long, conflicts_with = "snr")]
    target_rate: Option<f64>,
    /// Channel draws per point (default 100000, or 10000 for --target-rate)
    #[arg(long)]
    trials: Option<usize>,
    /// Bisection tolerance in dB
    #[arg(long, default_value_t = DEFAULT_TOL_DB)]
    tol_db: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn capacity(args: CapacityArgs) -> Result<()> {
    let nr = args.nr.unwrap_or(args.nt);
    let rows = match args.target_rate {
        Some(rate) => {
            let trials = args.trials.unwrap_or(DEFAULT_SEARCH_TRIALS);
            vec![capacity_for_rate(args.nt, nr, rate, args.tol_db, trials, args.seed)?]
        }
        None => capacity_points(args.nt, nr, &args.snr, args.trials.unwrap_or(DEFAULT_TRIALS), args.seed)?,
    };
    write_capacity_csv(&rows, open_out(&args.out)?)?;
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(Command::Capacity(args)) = cli.command {
        return capacity(args);
    }
    let file = match &cli.config {
        Some(p) => ConfigLayer::load(p)?,
        None => ConfigLayer::default(),
    };
    let mut config = cli.sim.over(file)?.resolve()?;
    config.timing = !cli.no_timing;
    log::info!("{} workers", config.workers);
    let sim = Simulator::new(config)?;
    let out = open_out(&sim.config().out)?;
    sim.run_sweep(out)?;
    Ok(())
}
