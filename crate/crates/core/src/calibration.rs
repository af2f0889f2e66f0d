//! Per-day device calibration records and date-ordered series.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("qubit {0} appears more than once")]
    DuplicateQubit(u32),
    #[error("{what} = {value} is not a probability in [0, 1]")]
    ProbabilityOutOfRange { what: &'static str, value: f64 },
    #[error("link ({0}, {1}) is not normalized: endpoints must be strictly increasing")]
    UnnormalizedLink(u32, u32),
    #[error("link ({0}, {1}) appears more than once")]
    DuplicateLink(u32, u32),
    #[error("a series needs at least one snapshot")]
    EmptySeries,
    #[error("two snapshots share the date {0}")]
    DuplicateDate(NaiveDate),
    #[error("snapshot device {found:?} does not match series device {expected:?}")]
    DeviceMismatch { expected: String, found: String },
}

fn check_probability(what: &'static str, value: f64) -> Result<(), CalibrationError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(CalibrationError::ProbabilityOutOfRange { what, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitRecord {
    pub qubit_index: u32,
    pub pauli_x_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnotLinkRecord {
    pub qubit_a: u32,
    pub qubit_b: u32,
    pub cnot_error: f64,
}

impl CnotLinkRecord {
    /// Link with endpoints reordered so the smaller index comes first.
    pub fn normalized(a: u32, b: u32, cnot_error: f64) -> Self {
        Self {
            qubit_a: a.min(b),
            qubit_b: a.max(b),
            cnot_error,
        }
    }

    pub fn endpoints(&self) -> (u32, u32) {
        (self.qubit_a, self.qubit_b)
    }
}

/// One day's calibration for one device. Qubits are kept sorted by index and
/// links sorted by normalized endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSnapshot {
    pub device_name: String,
    pub date: NaiveDate,
    qubits: Vec<QubitRecord>,
    links: Vec<CnotLinkRecord>,
}

impl CalibrationSnapshot {
    pub fn new(
        device_name: impl Into<String>,
        date: NaiveDate,
        mut qubits: Vec<QubitRecord>,
        mut links: Vec<CnotLinkRecord>,
    ) -> Result<Self, CalibrationError> {
        qubits.sort_by_key(|q| q.qubit_index);
        for pair in qubits.windows(2) {
            if pair[0].qubit_index == pair[1].qubit_index {
                return Err(CalibrationError::DuplicateQubit(pair[0].qubit_index));
            }
        }
        for q in &qubits {
            check_probability("pauli_x_error", q.pauli_x_error)?;
        }
        for link in &links {
            if link.qubit_a >= link.qubit_b {
                return Err(CalibrationError::UnnormalizedLink(
                    link.qubit_a,
                    link.qubit_b,
                ));
            }
            check_probability("cnot_error", link.cnot_error)?;
        }
        links.sort_by_key(CnotLinkRecord::endpoints);
        for pair in links.windows(2) {
            if pair[0].endpoints() == pair[1].endpoints() {
                return Err(CalibrationError::DuplicateLink(
                    pair[0].qubit_a,
                    pair[0].qubit_b,
                ));
            }
        }
        Ok(Self {
            device_name: device_name.into(),
            date,
            qubits,
            links,
        })
    }

    pub fn qubits(&self) -> &[QubitRecord] {
        &self.qubits
    }

    pub fn links(&self) -> &[CnotLinkRecord] {
        &self.links
    }

    pub fn pauli_x_error(&self, qubit: u32) -> Option<f64> {
        self.qubits
            .binary_search_by_key(&qubit, |q| q.qubit_index)
            .ok()
            .map(|i| self.qubits[i].pauli_x_error)
    }

    pub fn cnot_error(&self, a: u32, b: u32) -> Option<f64> {
        let key = (a.min(b), a.max(b));
        self.links
            .binary_search_by_key(&key, CnotLinkRecord::endpoints)
            .ok()
            .map(|i| self.links[i].cnot_error)
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }
}

/// Snapshots of one device in strictly increasing date order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSeries {
    pub device_name: String,
    snapshots: Vec<CalibrationSnapshot>,
}

impl CalibrationSeries {
    pub fn new(mut snapshots: Vec<CalibrationSnapshot>) -> Result<Self, CalibrationError> {
        let device_name = snapshots
            .first()
            .ok_or(CalibrationError::EmptySeries)?
            .device_name
            .clone();
        if let Some(s) = snapshots.iter().find(|s| s.device_name != device_name) {
            return Err(CalibrationError::DeviceMismatch {
                expected: device_name,
                found: s.device_name.clone(),
            });
        }
        snapshots.sort_by_key(|s| s.date);
        for pair in snapshots.windows(2) {
            if pair[0].date == pair[1].date {
                return Err(CalibrationError::DuplicateDate(pair[0].date));
            }
        }
        Ok(Self {
            device_name,
            snapshots,
        })
    }

    pub fn snapshots(&self) -> &[CalibrationSnapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.snapshots.iter().map(|s| s.date).collect()
    }

    /// Pauli-X error of `qubit` per day; `None` where the day omits it.
    pub fn pauli_x_timeseries(&self, qubit: u32) -> Vec<(NaiveDate, Option<f64>)> {
        self.snapshots
            .iter()
            .map(|s| (s.date, s.pauli_x_error(qubit)))
            .collect()
    }

    pub fn cnot_timeseries(&self, a: u32, b: u32) -> Vec<(NaiveDate, Option<f64>)> {
        self.snapshots
            .iter()
            .map(|s| (s.date, s.cnot_error(a, b)))
            .collect()
    }

    /// Every qubit index seen on any day, ascending.
    pub fn qubit_indices(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self
            .snapshots
            .iter()
            .flat_map(|s| s.qubits.iter().map(|q| q.qubit_index))
            .collect();
        set.into_iter().collect()
    }

    /// Every normalized link seen on any day, in lexicographic order.
    pub fn link_endpoints(&self) -> Vec<(u32, u32)> {
        let set: BTreeSet<(u32, u32)> = self
            .snapshots
            .iter()
            .flat_map(|s| s.links.iter().map(CnotLinkRecord::endpoints))
            .collect();
        set.into_iter().collect()
    }
}
