//! Per-qubit drift statistics across calibration days.

use adaptive_qec_core::CalibrationSeries;

/// Reference Pauli-X error level used to flag drifting qubits.
pub const REFERENCE_LEVEL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct QubitDrift {
    pub qubit: u32,
    /// Days on which the qubit was calibrated.
    pub days: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// At or below the reference on some day and above it on another.
    pub crosses_reference: bool,
}

pub fn summarize(series: &CalibrationSeries) -> Vec<QubitDrift> {
    series
        .qubit_indices()
        .into_iter()
        .filter_map(|qubit| {
            let values: Vec<f64> = series
                .pauli_x_timeseries(qubit)
                .into_iter()
                .filter_map(|(_, p)| p)
                .collect();
            if values.is_empty() {
                return None;
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Some(QubitDrift {
                qubit,
                days: values.len(),
                min,
                max,
                mean,
                std: var.sqrt(),
                crosses_reference: min <= REFERENCE_LEVEL && max > REFERENCE_LEVEL,
            })
        })
        .collect()
}
