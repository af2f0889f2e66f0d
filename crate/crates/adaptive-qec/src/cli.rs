//! Command-line definitions and exit-code mapping.
//!
//! Exit codes: 0 success, 2 usage or data error, 3 internal invariant
//! violation.

use std::path::PathBuf;

use adaptive_qec_core::CostAccounting;
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "adaptive-qec",
    version,
    about = "Per-qubit surface-code distance planning from calibration data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Parse calibration exports into a series with drift summaries.
    Ingest(IngestArgs),
    /// Monte Carlo logical error rates over a (distance, p) grid.
    Sweep(SweepArgs),
    /// Fit the power-law logical error model to a sweep.
    Fit(FitArgs),
    /// Assign per-qubit distances for each day and compare overhead.
    Plan(PlanArgs),
    /// Summarize a finished plan run.
    Report(ReportArgs),
    /// Re-run the command recorded in a run manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accounting {
    /// Data qubits only (d^2 per rotated patch).
    Data,
    /// Data plus ancilla qubits (2d^2 - 1 per rotated patch).
    Total,
}

impl From<Accounting> for CostAccounting {
    fn from(a: Accounting) -> Self {
        match a {
            Accounting::Data => CostAccounting::DataOnly,
            Accounting::Total => CostAccounting::WithAncilla,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IngestArgs {
    /// Directory of `<device>_YYYY-MM-DD.csv` files, or a single CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// Date for a single input file without a date in its name.
    #[arg(long)]
    pub date: Option<NaiveDate>,
    /// Device name; defaults to the file-name prefix.
    #[arg(long)]
    pub device: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
    pub distances: Vec<u32>,
    #[arg(
        long = "p-grid",
        value_delimiter = ',',
        default_value = "0.01,0.02,0.03,0.05,0.07,0.09,0.11,0.13,0.15"
    )]
    pub p_grid: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write `layout_d<d>.json` for each distance.
    #[arg(long)]
    pub dump_layouts: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads (0 = all cores). Never affects results.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Sweep CSV written by `sweep`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = adaptive_qec_core::DEFAULT_TARGET_LOGICAL_ERROR)]
    pub target: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PlanArgs {
    /// `series.json` from `ingest`, a directory of calibration CSVs, or one CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Threshold table (`.csv`) or fitted model (`.json`); built-in table if omitted.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Logical target for model thresholds (a table carries its own).
    #[arg(long, default_value_t = adaptive_qec_core::DEFAULT_TARGET_LOGICAL_ERROR)]
    pub target: f64,
    /// Largest distance the adaptive plan may assign.
    #[arg(long = "d-max", default_value_t = 9)]
    pub d_max: u32,
    /// Largest distance considered when resolving the fixed baseline.
    #[arg(long = "baseline-d-max", default_value_t = 13)]
    pub baseline_d_max: u32,
    #[arg(long, value_enum, default_value_t = Accounting::Data)]
    pub accounting: Accounting,
    #[arg(long)]
    pub date: Option<NaiveDate>,
    #[arg(long)]
    pub device: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    /// Output directory of a `plan` run.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write `report.txt`; defaults to `<input>/report`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
}

/// A broken internal invariant; maps to exit code 3.
#[derive(Debug, thiserror::Error)]
#[error("internal invariant violated: {0}")]
pub struct InvariantViolation(pub String);

pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<InvariantViolation>().is_some() {
        3
    } else {
        2
    }
}
