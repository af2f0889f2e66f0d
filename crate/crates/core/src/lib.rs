//! Adaptive surface-code distance planning.
//!
//! This crate holds the allocation-only algorithmic core: rotated surface-code
//! geometry, an exact minimum-weight perfect-matching decoder, counter-based
//! Monte Carlo estimation of logical error rates, the power-law logical error
//! model with its least-squares fit, and the per-qubit distance planner.
//!
//! File formats, CSV ingestion, parallel sampling and the command-line front
//! end live in the `adaptive-qec` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod calibration;
pub mod layout;
pub mod matching;
pub mod model;
pub mod planner;
pub mod sampling;

pub use calibration::{
    CalibrationError, CalibrationSeries, CalibrationSnapshot, CnotLinkRecord, QubitRecord,
};
pub use layout::{ErrorPattern, LayoutError, RotatedSurfaceLayout, Stabilizer, Syndrome};
pub use matching::{DecodeError, Decoder, MatchingGraph, MAX_DEFECTS};
pub use model::{
    fit_model, physical_qubit_cost, required_distance, CostAccounting, DistanceDecision,
    ExclusionReason, FitReport, LogicalErrorModel, ModelError, QubitLayout, ThresholdSource,
    ThresholdTable, DEFAULT_TARGET_LOGICAL_ERROR, MAX_PLANNING_DISTANCE, P_MIN,
};
pub use planner::{
    baseline_distance, compare_overhead, plan_day, usable_fraction, AssignmentPolicy, FleetPlan,
    PlanError, QubitAssignment, SavingsReport,
};
pub use sampling::{
    crossing_point, exact_logical_error_rate_d3, sample_logical_error_rate, sweep, wilson_interval,
    MonteCarloEstimate, SampleError, ShotSampler, SweepRow, SweepTable, MAX_SAMPLING_DISTANCE,
};
