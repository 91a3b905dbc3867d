// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! `leaknull` command-line tool.
//!
//! Exit status: 0 on success, 1 when a numerical procedure fails (partial
//! output may remain), 2 for usage or input errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<leaknull::Error> for CliError {
    fn from(e: leaknull::Error) -> Self {
        CliError {
            code: if e.is_numerical() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "leaknull", version, about = "Spectator-leakage nulling toolkit")]
pub struct Cli {
    /// Device configuration JSON; the bundled device when absent.
    #[arg(long, global = true, env = "LEAKNULL_CONFIG")]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "leaknull-out")]
    pub out: PathBuf,

    /// Root seed for any sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Coupler off-point where the bright/dark coupling vanishes.
    SolveOff(SolveOffArgs),
    /// Leakage versus spectator-coupler frequency.
    Sweep(SweepArgs),
    /// Simulate one CZ gate.
    Simulate(SimulateArgs),
    /// Fit a measured or synthetic series.
    Fit(FitArgs),
    /// Seepage, measurement floor and leakage error contribution.
    Budget(BudgetArgs),
    /// Compensate target flux amplitudes for crosstalk.
    Crosstalk(CrosstalkArgs),
    /// Generate synthetic leakage and fidelity series.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct SolveOffArgs {
    /// Spectator frequency, GHz.
    #[arg(long, conflicts_with = "fs_range", required_unless_present = "fs_range")]
    pub fs: Option<f64>,
    /// Sweep `start,stop,step` in GHz.
    #[arg(long, value_delimiter = ',')]
    pub fs_range: Option<Vec<f64>>,
    /// Search window `lo,hi` in GHz; defaults to 1.5 GHz below the idle coupler.
    #[arg(long, value_delimiter = ',')]
    pub bracket: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    /// Static controls held for the gate duration.
    Rect,
    /// Flat-top ramps from the idle point.
    Flattop,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Spectator frequency, GHz.
    #[arg(long)]
    pub fs: f64,
    /// `lo,hi,points` for the coupler frequency grid.
    #[arg(long, value_delimiter = ',', required = true)]
    pub fcs_range: Vec<f64>,
    #[arg(long, value_enum, default_value = "rect")]
    pub pulse: PulseKind,
    /// Gate duration, ns. Rect defaults to the calibrated return time,
    /// flattop to the configured CZ duration.
    #[arg(long)]
    pub gate_ns: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Spectator frequencies, GHz; idle values when absent.
    #[arg(long, value_delimiter = ',')]
    pub fs: Option<Vec<f64>>,
    /// Spectator-coupler plateau frequencies, GHz; idle values when absent.
    #[arg(long, value_delimiter = ',')]
    pub fcs: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "rect")]
    pub pulse: PulseKind,
    #[arg(long)]
    pub gate_ns: Option<f64>,
    /// Also write the sampled trajectory.
    #[arg(long)]
    pub trajectory: bool,
    /// Gate-length scan `start,stop,points` in ns.
    #[arg(long, value_delimiter = ',')]
    pub scan_gate: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    Leak,
    Fidelity,
    Beta,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub model: FitModel,
    /// CSV with columns depth,value.
    pub data: PathBuf,
    /// Fixed leakage decay base for the fidelity model.
    #[arg(long, required_if_eq("model", "fidelity"))]
    pub lambda1: Option<f64>,
    /// Leakage rate entering the average fidelity.
    #[arg(long, default_value_t = 0.0)]
    pub l1: f64,
    /// Shots per point for binomial weighting of the beta model.
    #[arg(long)]
    pub shots: Option<u64>,
}

#[derive(Args, Debug)]
pub struct BudgetArgs {
    /// Smallest resolvable steady-state leak population.
    #[arg(long, default_value_t = 0.01)]
    pub p_floor: f64,
    /// Per-gate leakage for the error contribution.
    #[arg(long, default_value_t = 0.0)]
    pub l1: f64,
}

#[derive(Args, Debug)]
pub struct CrosstalkArgs {
    /// Square matrix CSV with a label header row.
    pub matrix: PathBuf,
    /// CSV with columns label,target.
    pub targets: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub l1: f64,
    #[arg(long)]
    pub l2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p0: f64,
    /// Largest cycle depth.
    #[arg(long, default_value_t = 500)]
    pub max_depth: u32,
    #[arg(long, default_value_t = 10)]
    pub depth_step: u32,
    /// Shots per depth; exact values when absent.
    #[arg(long)]
    pub shots: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
