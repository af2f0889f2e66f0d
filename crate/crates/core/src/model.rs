//! Power-law logical error model `p_L = alpha * (p / p_th)^((d + 1) / 2)`,
//! its log-linear least-squares fit, per-distance threshold inversion,
//! distance selection and physical-qubit cost accounting.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::SweepTable;

/// Calibration values below this are treated as this value before planning.
pub const P_MIN: f64 = 1e-6;
pub const DEFAULT_TARGET_LOGICAL_ERROR: f64 = 1e-6;
pub const MAX_PLANNING_DISTANCE: u32 = 13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("physical error rate must be positive, got {0}")]
    NonPositiveP(f64),
    #[error("{0} is not a probability")]
    InvalidProbability(f64),
    #[error("invalid code distance {0}")]
    InvalidDistance(u32),
    #[error("model parameters out of range: alpha = {alpha}, p_th = {p_threshold}")]
    InvalidModel { alpha: f64, p_threshold: f64 },
    #[error("fit needs at least two usable rows with two distinct error rates ({rows} rows, {rates} rates)")]
    InsufficientData { rows: usize, rates: usize },
    #[error("fit design is degenerate: every usable row has distance {0}")]
    DegenerateDesign(u32),
    #[error("threshold table entry d = {distance}, p_max = {p_max} is invalid")]
    InvalidTableEntry { distance: u32, p_max: f64 },
    #[error("threshold table must increase strictly with distance (d = {0})")]
    NonMonotoneTable(u32),
    #[error("threshold table has no entry at or below d_max = {0}")]
    EmptyTable(u32),
    #[error("unrotated layouts are only costed for data qubits")]
    Unsupported,
}

fn check_distance(d: u32) -> Result<(), ModelError> {
    if d >= 3 && d % 2 == 1 {
        Ok(())
    } else {
        Err(ModelError::InvalidDistance(d))
    }
}

fn check_open_probability(p: f64) -> Result<(), ModelError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidProbability(p))
    }
}

fn exponent(d: u32) -> f64 {
    f64::from(d + 1) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalErrorModel {
    pub alpha: f64,
    pub p_threshold: f64,
}

impl LogicalErrorModel {
    pub fn new(alpha: f64, p_threshold: f64) -> Result<Self, ModelError> {
        if alpha > 0.0 && alpha.is_finite() && p_threshold > 0.0 && p_threshold < 1.0 {
            Ok(Self { alpha, p_threshold })
        } else {
            Err(ModelError::InvalidModel { alpha, p_threshold })
        }
    }

    /// `min(1, alpha * (p / p_th)^((d + 1) / 2))`.
    pub fn logical_error_rate(&self, p: f64, d: u32) -> Result<f64, ModelError> {
        if p.is_nan() || p > 1.0 {
            return Err(ModelError::InvalidProbability(p));
        }
        if p <= 0.0 {
            return Err(ModelError::NonPositiveP(p));
        }
        check_distance(d)?;
        Ok((self.alpha * libm::pow(p / self.p_threshold, exponent(d))).min(1.0))
    }

    /// Largest physical error rate reaching `target` at distance `d`:
    /// `p_th * (target / alpha)^(2 / (d + 1))`.
    pub fn physical_threshold(&self, d: u32, target: f64) -> Result<f64, ModelError> {
        check_open_probability(target)?;
        check_distance(d)?;
        Ok(self.p_threshold * libm::pow(target / self.alpha, 1.0 / exponent(d)))
    }
}

/// Fitted model plus diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: LogicalErrorModel,
    /// RMS of the residuals of the linearized fit, in natural-log units.
    pub residual_rms: f64,
    pub used_rows: usize,
    /// Rows with zero observed failures, left out of the fit.
    pub dropped_rows: usize,
}

impl FitReport {
    /// Least-squares fit on `(d, p, p_L)` points.
    ///
    /// With `x = (d + 1) / 2` and `y = ln p_L - x ln p` the model is linear,
    /// `y = ln alpha - x ln p_th`. Points with `p_L <= 0` are dropped.
    pub fn from_points(points: &[(u32, f64, f64)]) -> Result<Self, ModelError> {
        let used: Vec<(u32, f64, f64)> = points
            .iter()
            .copied()
            .filter(|&(_, _, pl)| pl > 0.0)
            .collect();
        let dropped_rows = points.len() - used.len();
        let mut rates: Vec<u64> = used.iter().map(|&(_, p, _)| p.to_bits()).collect();
        rates.sort_unstable();
        rates.dedup();
        if used.len() < 2 || rates.len() < 2 {
            return Err(ModelError::InsufficientData {
                rows: used.len(),
                rates: rates.len(),
            });
        }
        for &(d, p, _) in &used {
            check_distance(d)?;
            check_open_probability(p)?;
        }
        if used.iter().all(|&(d, _, _)| d == used[0].0) {
            return Err(ModelError::DegenerateDesign(used[0].0));
        }

        let xy: Vec<(f64, f64)> = used
            .iter()
            .map(|&(d, p, pl)| {
                let x = exponent(d);
                (x, libm::log(pl) - x * libm::log(p))
            })
            .collect();
        let n = xy.len() as f64;
        let x_mean = xy.iter().map(|v| v.0).sum::<f64>() / n;
        let y_mean = xy.iter().map(|v| v.1).sum::<f64>() / n;
        let sxx: f64 = xy.iter().map(|v| (v.0 - x_mean) * (v.0 - x_mean)).sum();
        let sxy: f64 = xy.iter().map(|v| (v.0 - x_mean) * (v.1 - y_mean)).sum();
        let slope = sxy / sxx;
        let intercept = y_mean - slope * x_mean;
        let rss: f64 = xy
            .iter()
            .map(|&(x, y)| {
                let r = y - (intercept + slope * x);
                r * r
            })
            .sum();

        let model = LogicalErrorModel::new(libm::exp(intercept), libm::exp(-slope))?;
        Ok(Self {
            model,
            residual_rms: libm::sqrt(rss / n),
            used_rows: xy.len(),
            dropped_rows,
        })
    }

    /// Fit to the point estimates of a sweep.
    pub fn from_sweep(sweep: &SweepTable) -> Result<Self, ModelError> {
        let points: Vec<(u32, f64, f64)> = sweep
            .rows
            .iter()
            .map(|r| (r.distance, r.p, r.estimate.point_estimate))
            .collect();
        Self::from_points(&points)
    }
}

/// Fits the model to a sweep; rows with zero failures are dropped.
pub fn fit_model(sweep: &SweepTable) -> Result<FitReport, ModelError> {
    FitReport::from_sweep(sweep)
}

/// Maximum tolerable physical error rate per distance for one logical target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    entries: BTreeMap<u32, f64>,
    pub target_logical_error: f64,
}

impl ThresholdTable {
    pub fn new<I>(entries: I, target_logical_error: f64) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (u32, f64)>,
    {
        check_open_probability(target_logical_error)?;
        let mut map = BTreeMap::new();
        for (distance, p_max) in entries {
            if check_distance(distance).is_err()
                || !(p_max > 0.0 && p_max < 1.0)
                || map.insert(distance, p_max).is_some()
            {
                return Err(ModelError::InvalidTableEntry { distance, p_max });
            }
        }
        let mut previous = 0.0;
        for (&d, &p_max) in &map {
            if p_max <= previous {
                return Err(ModelError::NonMonotoneTable(d));
            }
            previous = p_max;
        }
        Ok(Self {
            entries: map,
            target_logical_error,
        })
    }

    /// Table implied by `model` at each of `distances`.
    pub fn from_model(
        model: &LogicalErrorModel,
        distances: &[u32],
        target: f64,
    ) -> Result<Self, ModelError> {
        let entries = distances
            .iter()
            .map(|&d| Ok((d, model.physical_threshold(d, target)?)))
            .collect::<Result<Vec<_>, ModelError>>()?;
        Self::new(entries, target)
    }

    pub fn get(&self, d: u32) -> Option<f64> {
        self.entries.get(&d).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().map(|(&d, &p)| (d, p))
    }

    pub fn distances(&self) -> Vec<u32> {
        self.entries.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Where per-distance thresholds come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdSource {
    Model(LogicalErrorModel),
    Table(ThresholdTable),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ExclusionReason {
    /// A distance would suffice, but it is larger than `d_max`.
    ExceedsMaxDistance { required: u32 },
    /// No distance up to the largest available one reaches the target.
    AboveCutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum DistanceDecision {
    Assigned { distance: u32 },
    Excluded(ExclusionReason),
}

impl DistanceDecision {
    pub fn distance(&self) -> Option<u32> {
        match *self {
            DistanceDecision::Assigned { distance } => Some(distance),
            DistanceDecision::Excluded(_) => None,
        }
    }

    pub fn is_assigned(&self) -> bool {
        self.distance().is_some()
    }
}

/// Smallest odd distance up to `d_max` meeting the target at physical error
/// rate `p`. Rates below [`P_MIN`] (including zero) are raised to it.
///
/// In model mode `target` sets the logical goal and candidate distances are
/// `3, 5, ..., 13`; in table mode the table's own target applies and only
/// its distances are considered, with `p <= p_max(d)` counting as sufficient.
pub fn required_distance(
    source: &ThresholdSource,
    p: f64,
    target: f64,
    d_max: u32,
) -> Result<DistanceDecision, ModelError> {
    if !(MIN_DISTANCE..=MAX_PLANNING_DISTANCE).contains(&d_max) || d_max.is_multiple_of(2) {
        return Err(ModelError::InvalidDistance(d_max));
    }
    if p.is_nan() || p > 1.0 {
        return Err(ModelError::InvalidProbability(p));
    }
    let p = p.max(P_MIN);
    let needed = match source {
        ThresholdSource::Model(model) => {
            check_open_probability(target)?;
            let mut found = None;
            for d in (MIN_DISTANCE..=MAX_PLANNING_DISTANCE).step_by(2) {
                if model.logical_error_rate(p, d)? <= target {
                    found = Some(d);
                    break;
                }
            }
            found
        }
        ThresholdSource::Table(table) => {
            if table.entries.range(..=d_max).next().is_none() {
                return Err(ModelError::EmptyTable(d_max));
            }
            table
                .entries()
                .find(|&(_, p_max)| p <= p_max)
                .map(|(d, _)| d)
        }
    };
    Ok(match needed {
        Some(distance) if distance <= d_max => DistanceDecision::Assigned { distance },
        Some(required) => {
            DistanceDecision::Excluded(ExclusionReason::ExceedsMaxDistance { required })
        }
        None => DistanceDecision::Excluded(ExclusionReason::AboveCutoff),
    })
}

const MIN_DISTANCE: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitLayout {
    Rotated,
    Unrotated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostAccounting {
    DataOnly,
    WithAncilla,
}

/// Physical qubits per logical qubit at distance `d`.
pub fn physical_qubit_cost(
    d: u32,
    layout: QubitLayout,
    accounting: CostAccounting,
) -> Result<u64, ModelError> {
    check_distance(d)?;
    let d2 = u64::from(d) * u64::from(d);
    match (layout, accounting) {
        (QubitLayout::Rotated, CostAccounting::DataOnly) => Ok(d2),
        (QubitLayout::Rotated, CostAccounting::WithAncilla)
        | (QubitLayout::Unrotated, CostAccounting::DataOnly) => Ok(2 * d2 - 1),
        (QubitLayout::Unrotated, CostAccounting::WithAncilla) => Err(ModelError::Unsupported),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn reference_table() -> ThresholdTable {
        ThresholdTable::new([(7, 7e-4), (9, 1e-3), (11, 2e-3), (13, 7e-3)], 1e-6).unwrap()
    }

    #[test]
    fn forward_model_examples() {
        let m = LogicalErrorModel::new(0.1, 0.01).unwrap();
        assert_eq!(m.logical_error_rate(0.01, 3).unwrap(), 0.1);
        let v = m.logical_error_rate(0.001, 3).unwrap();
        assert!((v - 1e-3).abs() / 1e-3 < 1e-12);
        assert_eq!(m.logical_error_rate(0.5, 9).unwrap(), 1.0);
        assert_eq!(
            m.logical_error_rate(0.0, 3),
            Err(ModelError::NonPositiveP(0.0))
        );
        assert_eq!(
            m.logical_error_rate(-1e-3, 3),
            Err(ModelError::NonPositiveP(-1e-3))
        );
        assert_eq!(
            m.logical_error_rate(1e-3, 4),
            Err(ModelError::InvalidDistance(4))
        );
        assert!(LogicalErrorModel::new(0.0, 0.01).is_err());
        assert!(LogicalErrorModel::new(0.1, 1.0).is_err());
    }

    #[test]
    fn threshold_inversion() {
        let m = LogicalErrorModel::new(0.1, 0.01).unwrap();
        let p = m.physical_threshold(3, 1e-3).unwrap();
        assert!((p - 1e-3).abs() / 1e-3 < 1e-12);
        assert!(m.physical_threshold(3, 0.0).is_err());
        assert!(m.physical_threshold(3, 1.0).is_err());
    }

    #[test]
    fn fit_drops_zero_rows_and_rejects_bad_designs() {
        let m = LogicalErrorModel::new(0.1, 0.01).unwrap();
        let mut points = vec![];
        for d in [3, 5, 7] {
            for p in [1e-3, 2e-3, 5e-3] {
                points.push((d, p, m.logical_error_rate(p, d).unwrap()));
            }
        }
        points[4].2 = 0.0;
        let fit = FitReport::from_points(&points).unwrap();
        assert_eq!(fit.dropped_rows, 1);
        assert_eq!(fit.used_rows, 8);
        assert!((fit.model.alpha - 0.1).abs() / 0.1 < 1e-9);
        assert!((fit.model.p_threshold - 0.01).abs() / 0.01 < 1e-9);
        assert!(fit.residual_rms < 1e-9);

        let same_d: Vec<_> = points.iter().copied().filter(|r| r.0 == 5).collect();
        assert_eq!(
            FitReport::from_points(&same_d),
            Err(ModelError::DegenerateDesign(5))
        );
        let same_p: Vec<_> = points.iter().copied().filter(|r| r.1 == 1e-3).collect();
        assert!(matches!(
            FitReport::from_points(&same_p),
            Err(ModelError::InsufficientData { rates: 1, .. })
        ));
        assert!(matches!(
            FitReport::from_points(&[]),
            Err(ModelError::InsufficientData { rows: 0, .. })
        ));
    }

    #[test]
    fn table_validation() {
        assert_eq!(
            ThresholdTable::new([(7, 1e-3), (9, 1e-3)], 1e-6),
            Err(ModelError::NonMonotoneTable(9))
        );
        assert!(matches!(
            ThresholdTable::new([(8, 1e-3)], 1e-6),
            Err(ModelError::InvalidTableEntry { distance: 8, .. })
        ));
        assert!(matches!(
            ThresholdTable::new([(7, 0.0)], 1e-6),
            Err(ModelError::InvalidTableEntry { .. })
        ));
        assert!(ThresholdTable::new([(7, 1e-3)], 0.0).is_err());
    }

    #[test]
    fn table_mode_selection() {
        let source = ThresholdSource::Table(reference_table());
        let pick = |p| required_distance(&source, p, 1e-6, 13).unwrap();
        assert_eq!(pick(8e-4), DistanceDecision::Assigned { distance: 9 });
        assert_eq!(pick(1.5e-3), DistanceDecision::Assigned { distance: 11 });
        assert_eq!(pick(1e-3), DistanceDecision::Assigned { distance: 9 });
        assert_eq!(
            pick(8e-3),
            DistanceDecision::Excluded(ExclusionReason::AboveCutoff)
        );
        // clamped zero picks the smallest table distance
        assert_eq!(pick(0.0), DistanceDecision::Assigned { distance: 7 });
        assert_eq!(
            required_distance(&source, 1.5e-3, 1e-6, 9).unwrap(),
            DistanceDecision::Excluded(ExclusionReason::ExceedsMaxDistance { required: 11 })
        );
        assert_eq!(
            required_distance(&source, 1e-4, 1e-6, 5),
            Err(ModelError::EmptyTable(5))
        );
        assert_eq!(
            required_distance(&source, 1e-4, 1e-6, 15),
            Err(ModelError::InvalidDistance(15))
        );
    }

    #[test]
    fn model_mode_selection() {
        let m = LogicalErrorModel::new(0.1, 0.01).unwrap();
        let source = ThresholdSource::Model(m);
        assert_eq!(
            required_distance(&source, 0.0, 1e-6, 13).unwrap(),
            DistanceDecision::Assigned { distance: 3 }
        );
        // p = p_th never improves with distance
        assert_eq!(
            required_distance(&source, 0.01, 1e-6, 13).unwrap(),
            DistanceDecision::Excluded(ExclusionReason::AboveCutoff)
        );
        // 9e-4: need 0.09^x <= 1e-5, x >= 4.78 -> x = 5, d = 9
        assert_eq!(
            required_distance(&source, 9e-4, 1e-6, 13).unwrap(),
            DistanceDecision::Assigned { distance: 9 }
        );
        assert_eq!(
            required_distance(&source, 9e-4, 1e-6, 7).unwrap(),
            DistanceDecision::Excluded(ExclusionReason::ExceedsMaxDistance { required: 9 })
        );
    }

    #[test]
    fn qubit_costs() {
        use CostAccounting::*;
        use QubitLayout::*;
        assert_eq!(physical_qubit_cost(9, Rotated, DataOnly), Ok(81));
        assert_eq!(physical_qubit_cost(13, Rotated, DataOnly), Ok(169));
        assert_eq!(physical_qubit_cost(7, Rotated, DataOnly), Ok(49));
        assert_eq!(physical_qubit_cost(3, Rotated, WithAncilla), Ok(17));
        assert_eq!(physical_qubit_cost(3, Unrotated, DataOnly), Ok(17));
        assert_eq!(
            physical_qubit_cost(3, Unrotated, WithAncilla),
            Err(ModelError::Unsupported)
        );
        assert_eq!(
            physical_qubit_cost(2, Rotated, DataOnly),
            Err(ModelError::InvalidDistance(2))
        );
    }
}
