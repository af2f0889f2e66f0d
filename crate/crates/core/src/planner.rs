//! Per-day distance assignment and overhead comparison.
//!
//! For each snapshot: read each qubit's Pauli-X error, rank the qubits by it,
//! find the smallest sufficient distance per qubit, exclude qubits whose
//! requirement exceeds `d_max`, and record the rest. Ranking only orders the
//! report; each qubit's decision depends on its own error rate alone.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{CalibrationSeries, CalibrationSnapshot};
use crate::model::{
    physical_qubit_cost, required_distance, CostAccounting, DistanceDecision, ModelError,
    QubitLayout, ThresholdSource, ThresholdTable, MAX_PLANNING_DISTANCE, P_MIN,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("snapshot has no qubits")]
    EmptySnapshot,
    #[error("no usable qubits: no qubit can be assigned a distance")]
    NoUsableQubits,
    #[error("threshold table has no entry for d = {0}")]
    MissingDistance(u32),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssignmentPolicy {
    pub target_logical_error: f64,
    pub d_max: u32,
    pub accounting: CostAccounting,
}

impl AssignmentPolicy {
    pub fn new(
        target_logical_error: f64,
        d_max: u32,
        accounting: CostAccounting,
    ) -> Result<Self, ModelError> {
        if !(3..=MAX_PLANNING_DISTANCE).contains(&d_max) || d_max.is_multiple_of(2) {
            return Err(ModelError::InvalidDistance(d_max));
        }
        if !(target_logical_error > 0.0 && target_logical_error < 1.0) {
            return Err(ModelError::InvalidProbability(target_logical_error));
        }
        Ok(Self {
            target_logical_error,
            d_max,
            accounting,
        })
    }

    pub fn with_d_max(self, d_max: u32) -> Result<Self, ModelError> {
        Self::new(self.target_logical_error, d_max, self.accounting)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitAssignment {
    pub qubit: u32,
    /// Calibrated error as reported, before clamping.
    pub p: f64,
    pub decision: DistanceDecision,
    /// Physical qubits for an assigned qubit's patch; `None` when excluded.
    pub cost: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetPlan {
    pub date: NaiveDate,
    pub assignments: BTreeMap<u32, QubitAssignment>,
    /// Qubit indices in ascending error order (ties by index).
    pub ranking: Vec<u32>,
    pub usable_count: usize,
    pub total_count: usize,
    pub total_physical_qubits: u64,
    pub per_distance_histogram: BTreeMap<u32, usize>,
}

impl FleetPlan {
    pub fn usable_fraction(&self) -> f64 {
        self.usable_count as f64 / self.total_count as f64
    }

    /// Assignments in ranking order.
    pub fn ranked(&self) -> impl Iterator<Item = &QubitAssignment> {
        self.ranking.iter().map(|q| &self.assignments[q])
    }
}

pub fn plan_day(
    snapshot: &CalibrationSnapshot,
    policy: &AssignmentPolicy,
    source: &ThresholdSource,
) -> Result<FleetPlan, PlanError> {
    if snapshot.is_empty() {
        return Err(PlanError::EmptySnapshot);
    }
    let mut ranked: Vec<(f64, u32)> = snapshot
        .qubits()
        .iter()
        .map(|q| (q.pauli_x_error, q.qubit_index))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut assignments = BTreeMap::new();
    let mut histogram = BTreeMap::new();
    let mut usable_count = 0;
    let mut total_physical_qubits = 0;
    for &(p, qubit) in &ranked {
        let decision = required_distance(source, p, policy.target_logical_error, policy.d_max)?;
        let cost = match decision.distance() {
            Some(d) => {
                let cost = physical_qubit_cost(d, QubitLayout::Rotated, policy.accounting)?;
                usable_count += 1;
                total_physical_qubits += cost;
                *histogram.entry(d).or_insert(0) += 1;
                Some(cost)
            }
            None => None,
        };
        assignments.insert(
            qubit,
            QubitAssignment {
                qubit,
                p,
                decision,
                cost,
            },
        );
    }

    Ok(FleetPlan {
        date: snapshot.date,
        assignments,
        ranking: ranked.into_iter().map(|(_, q)| q).collect(),
        usable_count,
        total_count: snapshot.qubits().len(),
        total_physical_qubits,
        per_distance_histogram: histogram,
    })
}

/// Fraction of qubits whose (clamped) error is at or below `p_max(d)`.
pub fn usable_fraction(
    snapshot: &CalibrationSnapshot,
    d: u32,
    table: &ThresholdTable,
) -> Result<f64, PlanError> {
    let p_max = table.get(d).ok_or(PlanError::MissingDistance(d))?;
    if snapshot.is_empty() {
        return Err(PlanError::EmptySnapshot);
    }
    let usable = snapshot
        .qubits()
        .iter()
        .filter(|q| q.pauli_x_error.max(P_MIN) <= p_max)
        .count();
    Ok(usable as f64 / snapshot.qubits().len() as f64)
}

/// Largest distance any non-excluded qubit needs on any day.
pub fn baseline_distance(
    series: &CalibrationSeries,
    policy: &AssignmentPolicy,
    source: &ThresholdSource,
) -> Result<u32, PlanError> {
    let mut worst = None;
    for snapshot in series.snapshots() {
        for q in snapshot.qubits() {
            let decision = required_distance(
                source,
                q.pauli_x_error,
                policy.target_logical_error,
                policy.d_max,
            )?;
            if let Some(d) = decision.distance() {
                worst = worst.max(Some(d));
            }
        }
    }
    worst.ok_or(PlanError::NoUsableQubits)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsReport {
    pub baseline_distance: u32,
    pub baseline_cost_per_logical: u64,
    pub adaptive_mean_cost_per_logical: f64,
    pub savings_fraction: f64,
    /// Sum of assigned patch costs over all plans.
    pub adaptive_total_physical_qubits: u64,
    /// Number of assigned logical qubits over all plans.
    pub adaptive_logical_qubits: usize,
    pub per_day_usability: Vec<(NaiveDate, f64)>,
}

pub fn compare_overhead(
    plans: &[FleetPlan],
    baseline_d: u32,
    accounting: CostAccounting,
) -> Result<SavingsReport, PlanError> {
    let logical: usize = plans.iter().map(|p| p.usable_count).sum();
    if logical == 0 {
        return Err(PlanError::NoUsableQubits);
    }
    let total: u64 = plans.iter().map(|p| p.total_physical_qubits).sum();
    let baseline_cost = physical_qubit_cost(baseline_d, QubitLayout::Rotated, accounting)?;
    let adaptive = total as f64 / logical as f64;
    Ok(SavingsReport {
        baseline_distance: baseline_d,
        baseline_cost_per_logical: baseline_cost,
        adaptive_mean_cost_per_logical: adaptive,
        savings_fraction: 1.0 - adaptive / baseline_cost as f64,
        adaptive_total_physical_qubits: total,
        adaptive_logical_qubits: logical,
        per_day_usability: plans
            .iter()
            .map(|p| (p.date, p.usable_fraction()))
            .collect(),
    })
}
