use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qsde_sim::cli::{self, Outcome, RunConfig};
use qsde_sim::FilterKind;

#[derive(Parser)]
#[command(name = "qsde-sim", version, about = "Repeated-interaction atom/field simulator")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// JSON config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    runs: Option<u64>,
    #[arg(long, global = true)]
    slices: Option<usize>,
    #[arg(long, global = true)]
    recycle: Option<bool>,
    /// Record string: `0010` for counting, `+-++` for homodyne
    #[arg(long, global = true, allow_hyphen_values = true)]
    record: Option<String>,
    /// Export controlled-Ry as ry/cx instead of cu3
    #[arg(long, global = true)]
    decompose_cry: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Discrete master equation trajectory
    Master,
    /// Homodyne filter along --record
    FilterHomodyne,
    /// Photon-counting filter along --record
    FilterCounting,
    /// Monte Carlo statistics for every basis pair
    Sample,
    /// Sampled vs filter vs exact conditioning, with z-scores
    Compare,
    /// OpenQASM 2.0 for the unrecycled chain
    EmitQasm,
    /// Small-step limits of the slice coefficients
    Limits,
}

fn run(args: Args) -> qsde_sim::Result<Outcome> {
    let path = args.config.ok_or_else(|| qsde_sim::Error::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.runs {
        cfg.runs = r;
    }
    if let Some(n) = args.slices {
        cfg.n_slices = n;
    }
    if let Some(r) = args.recycle {
        cfg.recycle = r;
    }
    if args.record.is_some() {
        cfg.record = args.record;
    }
    cfg.decompose_cry |= args.decompose_cry;
    cfg.validate()?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let record = || cfg.record.clone().ok_or_else(|| qsde_sim::Error::Config("--record is required".into()));
    match args.command {
        Command::Master => cli::cmd_master(&cfg, &args.out),
        Command::FilterHomodyne => cli::cmd_filter(FilterKind::Homodyne, &cfg, &record()?, &args.out),
        Command::FilterCounting => cli::cmd_filter(FilterKind::Counting, &cfg, &record()?, &args.out),
        Command::Sample => cli::cmd_sample(&cfg, &args.out),
        Command::Compare => cli::cmd_compare(&cfg, &args.out),
        Command::EmitQasm => cli::cmd_emit_qasm(&cfg, &args.out),
        Command::Limits => cli::cmd_limits(&cfg, &args.out),
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", outcome.summary);
            for f in &outcome.files {
                let _ = writeln!(out, "  wrote {}", f.display());
            }
            if outcome.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
