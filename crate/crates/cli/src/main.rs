//! `dw`: witness evaluation, bound curves, simulated experiments and
//! self-test reports.
//!
//! Exit codes: 0 success, 2 input error, 3 semantic rejection, 4 numerical
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod error;
mod grid;
mod output;

#[derive(Parser, Debug)]
#[command(name = "dw", version, about = "Non-objectivity witnesses, bounds and simulated experiments")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Base seed for every random stream of the run.
    #[arg(long, global = true, env = "DW_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file; a manifest is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the CHSH witness of a behavior file.
    Witness(WitnessArgs),
    /// Tabulate a bound over a grid of targets.
    Curve(CurveArgs),
    /// Simulate the photonic experiment.
    Experiment(ExperimentArgs),
    /// Run the sum-of-squares and swap self-test on a realization.
    Selftest(SelftestArgs),
    /// Print an example input file.
    Example(ExampleArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct WitnessArgs {
    /// Behavior JSON: `{"settings":2,"outcomes":2,"p":[b1][b2][x1][x2]}`.
    pub file: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveModel {
    /// Exact no-signalling minimum of δ (linear program).
    Ns,
    /// Largest CHSH of a qubit pair with E00 = 1 − 2ε.
    QuantumOpt,
    /// Moment-relaxation minimum of δ.
    Npa,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CurveArgs {
    #[arg(value_enum)]
    pub model: CurveModel,
    /// ε grid: `a,b,c` or `start:stop:count`.
    #[arg(long)]
    pub eps: Option<String>,
    /// CHSH grid, same syntax; not used by `quantum-opt`.
    #[arg(long)]
    pub chsh: Option<String>,
    /// Relaxation level for `npa`: 1, 1+AB, 2, 3 or 3-isolated.
    #[arg(long, default_value = "2")]
    pub level: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentMode {
    /// Exact final state, angles optimized on it.
    TomographyOpt,
    /// Two-stage tuning from sampled counts only.
    Abinitio,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub mode: ExperimentMode,
    /// Model JSON (`delta`, `phase`, `counts`, `seed`, `background`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overlap Δ; overrides the config file.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Expected coincidences per setting; overrides the config file.
    #[arg(long)]
    pub counts: Option<u64>,
    /// Target ε grid.
    #[arg(long, default_value = "0.022")]
    pub eps: String,
    /// Repetitions per ε in `abinitio` mode.
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// CSV of every evaluation and its counts (`abinitio` only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// Φ+ with the observables reaching CHSH 5/2 at E00 = 1.
    Max,
    /// |00⟩ measured in σz everywhere.
    Product,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SelftestArgs {
    /// Realization JSON (`rho`, `dims`, `obs_a`, `obs_b`).
    #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
    pub file: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// White-noise weight mixed into the state.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleKind {
    PrBox,
    Uniform,
    MaxBehavior,
    MaxRealization,
    Model,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExampleArgs {
    #[arg(value_enum)]
    pub kind: ExampleKind,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Witness(a) => commands::witness::run(a, g, argv),
        Command::Curve(a) => commands::curve::run(a, g, argv),
        Command::Experiment(a) => commands::experiment::run(a, g, argv),
        Command::Selftest(a) => commands::selftest::run(a, g, argv),
        Command::Example(a) => commands::example::run(a, g, argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dw: {e}");
            ExitCode::from(e.code())
        }
    }
}
