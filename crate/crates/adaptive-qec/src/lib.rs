//! Calibration ingestion, file formats, parallel Monte Carlo and the
//! `adaptive-qec` command line, built on `adaptive-qec-core`.

pub mod cli;
pub mod commands;
pub mod drift;
pub mod formats;
pub mod ingest;
pub mod manifest;
pub mod parallel;

pub use cli::{Cli, Command};
