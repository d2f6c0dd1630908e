#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod ranges;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{Failure, Report, Status};
use output::{write_atomic, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "roadcloud", version, about = "VM allocation and reservation experiments for roadside cloudlets")]
struct Cli {
    /// Directory for manifest.json, summary.txt and the CSV outputs.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the allocation game for the `game` section.
    Allocate(AllocateArgs),
    /// Stationary distribution and loss rates of the reservation model.
    SteadyState(SteadyStateArgs),
    /// Exhaustive search for the best reservation.
    Optimize(OptimizeArgs),
    /// Loss-model or corridor simulation.
    Simulate(SimulateArgs),
    /// Analytic loss rates over a range of local arrival rates, with and
    /// without reservation.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct AllocateArgs {
    config: PathBuf,
    /// Write the per-round request trajectory.
    #[arg(long)]
    trace: bool,
    /// Re-solve from N random initial requests and report their spread.
    #[arg(long, default_value_t = 0)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Play this many repeated rounds under virtual resource counters.
    #[arg(long, default_value_t = 0)]
    vrc_rounds: usize,
}

#[derive(Args, Debug)]
pub struct SteadyStateArgs {
    config: PathBuf,
    /// Override every class's local arrival rate.
    #[arg(long)]
    local_rate: Option<f64>,
    #[arg(long)]
    state_cap: Option<usize>,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    config: PathBuf,
    /// Blocking-rate constraint.
    #[arg(long)]
    rbc: f64,
    /// Candidate reservations, e.g. `0:20:5x0:40:10` or `0,10x0,20`.
    #[arg(long)]
    grid: String,
    #[arg(long)]
    local_rate: Option<f64>,
    #[arg(long)]
    state_cap: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Loss,
    Corridor,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Loss)]
    mode: Mode,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    warmup: Option<f64>,
    /// Write the event log (first replication in loss mode).
    #[arg(long)]
    events: bool,
    /// Also solve the model analytically and write a comparison table.
    #[arg(long)]
    compare: bool,
    #[arg(long)]
    local_rate: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    config: PathBuf,
    /// Local arrival rates, e.g. `0.1:0.3:0.05`.
    #[arg(long, default_value = "0.1:0.3:0.05")]
    rates: String,
    /// Reservation `C_r,M_r` for the reserved curve; defaults to the
    /// config's reservation.
    #[arg(long)]
    reserve: Option<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Allocate(_) => "allocate",
            Self::SteadyState(_) => "steady-state",
            Self::Optimize(_) => "optimize",
            Self::Simulate(_) => "simulate",
            Self::Sweep(_) => "sweep",
        }
    }

    fn config_path(&self) -> &PathBuf {
        match self {
            Self::Allocate(a) => &a.config,
            Self::SteadyState(a) => &a.config,
            Self::Optimize(a) => &a.config,
            Self::Simulate(a) => &a.config,
            Self::Sweep(a) => &a.config,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = match &cli.command {
        Command::Allocate(a) => commands::allocate(a),
        Command::SteadyState(a) => commands::steady_state(a),
        Command::Optimize(a) => commands::optimize(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match finish(&cli, report, start) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Failure::IO_EXIT)
        }
    }
}

fn finish(cli: &Cli, report: Report, start: Instant) -> anyhow::Result<u8> {
    let Report {
        mut files,
        summary,
        status,
        seed,
        config_hash,
    } = report;
    let code = status.exit_code();
    print!("{summary}");
    if let Status::NotConverged(msg) | Status::Infeasible(msg) = &status {
        eprintln!("warning: {msg}");
    }
    files.add("summary.txt", summary.into_bytes());
    files.write_all(&cli.out)?;
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        config_path: cli.command.config_path().display().to_string(),
        config_hash,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: start.elapsed().as_secs_f64(),
        files: files.names(),
        exit_code: i32::from(code),
    };
    let json = serde_json::to_vec_pretty(&manifest)?;
    write_atomic(&cli.out.join("manifest.json"), &json)?;
    Ok(code)
}
