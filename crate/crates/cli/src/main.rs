use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relaywalk::{execute, ExperimentConfig, Mode, Overrides};

/// Covert coded message passing between random walkers.
///
/// Every flag can also be set through a `RELAYWALK_*` environment variable;
/// command-line values win.
#[derive(Parser)]
#[command(name = "relaywalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo delay (and covertness) over a (k, n) grid.
    Simulate(Common),
    /// Closed-form delay over a (k, n) grid.
    Analytic(Common),
    /// Detection and covertness probabilities for every k ≤ n.
    Covert(Common),
    /// Strategy sweeps over n with Pareto flags.
    Sweep(Common),
    /// Use the `mode` key of the config.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, env = "RELAYWALK_CONFIG")]
    config: PathBuf,
    /// Trials per (k, n) point.
    #[arg(long, env = "RELAYWALK_TRIALS")]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long, env = "RELAYWALK_SEED")]
    seed: Option<u64>,
    /// CSV destination; stdout when absent from both flag and config.
    #[arg(long, env = "RELAYWALK_OUT")]
    out: Option<PathBuf>,
    /// Replace analytic sweep metrics with simulated ones.
    #[arg(long, env = "RELAYWALK_SIMULATE")]
    simulate: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Simulate(a) => (Some(Mode::Simulate), a),
        Command::Analytic(a) => (Some(Mode::Analytic), a),
        Command::Covert(a) => (Some(Mode::Covert), a),
        Command::Sweep(a) => (Some(Mode::Sweep), a),
        Command::Run(a) => (None, a),
    };
    let overrides = Overrides { mode, trials: args.trials, seed: args.seed, out: args.out, simulate: args.simulate };
    match run(&args.config, &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(path: &Path, overrides: &Overrides) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(overrides)?;
    let mode = cfg.mode.ok_or("no mode given: set `mode` in the config or use a subcommand")?;
    let output = execute(&cfg, mode)?;
    match &cfg.out {
        Some(p) => fs::write(p, &output.csv).map_err(|e| format!("{}: {e}", p.display()))?,
        None => std::io::stdout().lock().write_all(output.csv.as_bytes())?,
    }
    if let (Some(p), Some(records)) = (&cfg.records, &output.records) {
        fs::write(p, records).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(())
}
