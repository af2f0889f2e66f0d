//! Monte Carlo logical-error estimation under i.i.d. bit-flip noise.
//!
//! Shot `i` of a cell draws its errors from a ChaCha8 stream keyed by the
//! cell seed with stream id `i`, so a shot's outcome depends only on
//! `(seed, i)`. Any partition of the shot range over workers yields the same
//! counts.

use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Range};

use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::{ErrorPattern, LayoutError, RotatedSurfaceLayout};
use crate::matching::{DecodeError, Decoder, MatchingGraph};

pub const MAX_SAMPLING_DISTANCE: u32 = 13;
/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("physical error rate {0} outside [0, 0.5]")]
    InvalidProbability(f64),
    #[error("invalid sampling distance {0}: must be odd and within 3..=13")]
    InvalidDistance(u32),
    #[error("shot count must be positive")]
    ZeroShots,
}

impl From<LayoutError> for SampleError {
    fn from(err: LayoutError) -> Self {
        match err {
            LayoutError::InvalidDistance(d) => SampleError::InvalidDistance(d),
            other => unreachable!("layout construction only fails on distance: {other}"),
        }
    }
}

fn check_probability(p: f64) -> Result<(), SampleError> {
    if (0.0..=0.5).contains(&p) {
        Ok(())
    } else {
        Err(SampleError::InvalidProbability(p))
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn chacha_key(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = mix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// Seed for the sweep cell `(distance, rate_index)` under a run seed.
pub fn cell_seed(seed: u64, distance: u32, rate_index: usize) -> u64 {
    mix64(mix64(mix64(seed) ^ u64::from(distance)) ^ rate_index as u64)
}

/// Failure tallies over a range of shots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub failures: u64,
    /// Shots whose defect count exceeded the matcher bound; these are
    /// already included in `failures`.
    pub saturated: u64,
}

impl Add for ShotCounts {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            failures: self.failures + rhs.failures,
            saturated: self.saturated + rhs.saturated,
        }
    }
}

impl AddAssign for ShotCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

/// Read-only sampling context for one `(d, p, seed)` cell.
#[derive(Debug, Clone)]
pub struct ShotSampler {
    layout: RotatedSurfaceLayout,
    graph: MatchingGraph,
    p: f64,
    bernoulli: Bernoulli,
    key: [u8; 32],
    seed: u64,
}

impl ShotSampler {
    pub fn new(distance: u32, p: f64, seed: u64) -> Result<Self, SampleError> {
        check_probability(p)?;
        if distance > MAX_SAMPLING_DISTANCE {
            return Err(SampleError::InvalidDistance(distance));
        }
        let layout = RotatedSurfaceLayout::new(distance)?;
        let graph = MatchingGraph::new(&layout);
        let bernoulli = Bernoulli::new(p).map_err(|_| SampleError::InvalidProbability(p))?;
        Ok(Self {
            layout,
            graph,
            p,
            bernoulli,
            key: chacha_key(seed),
            seed,
        })
    }

    pub fn distance(&self) -> u32 {
        self.layout.distance
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layout(&self) -> &RotatedSurfaceLayout {
        &self.layout
    }

    pub fn graph(&self) -> &MatchingGraph {
        &self.graph
    }

    /// The error pattern injected on shot `index`.
    pub fn error_for_shot(&self, index: u64) -> ErrorPattern {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        ErrorPattern::from_indices(
            (0..self.layout.num_data_qubits()).filter(|_| self.bernoulli.sample(&mut rng)),
        )
    }

    /// Per-worker state with its own decoder scratch.
    pub fn worker(&self) -> ShotWorker<'_> {
        ShotWorker {
            sampler: self,
            decoder: Decoder::new(&self.graph),
            parity: alloc::vec![false; self.graph.num_checks()],
            defects: Vec::new(),
        }
    }

    pub fn run(&self, shots: Range<u64>) -> ShotCounts {
        self.worker().run(shots)
    }
}

pub struct ShotWorker<'a> {
    sampler: &'a ShotSampler,
    decoder: Decoder<'a>,
    parity: Vec<bool>,
    defects: Vec<usize>,
}

impl ShotWorker<'_> {
    pub fn run(&mut self, shots: Range<u64>) -> ShotCounts {
        let mut counts = ShotCounts::default();
        for index in shots {
            match self.shot(index) {
                Ok(true) => counts.failures += 1,
                Ok(false) => {}
                Err(DecodeError::TooManyDefects(_)) => {
                    counts.failures += 1;
                    counts.saturated += 1;
                }
                Err(err) => unreachable!("sampled defects are valid checks: {err}"),
            }
        }
        counts
    }

    /// Whether shot `index` ends in a logical flip.
    ///
    /// The residual `error △ correction` is syndrome-free, so its logical
    /// parity is the XOR of the error's and the correction's overlap parity.
    fn shot(&mut self, index: u64) -> Result<bool, DecodeError> {
        let sampler = self.sampler;
        let layout = &sampler.layout;
        let d = layout.distance as usize;
        let logical_row = d / 2;

        let mut rng = ChaCha8Rng::from_seed(sampler.key);
        rng.set_stream(index);
        self.parity.iter_mut().for_each(|b| *b = false);
        let mut error_parity = false;
        for q in 0..layout.num_data_qubits() {
            if sampler.bernoulli.sample(&mut rng) {
                error_parity ^= q / d == logical_row;
                for &s in layout.z_checks_of(q) {
                    self.parity[s] ^= true;
                }
            }
        }
        self.defects.clear();
        self.defects.extend(
            self.parity
                .iter()
                .enumerate()
                .filter_map(|(s, &odd)| odd.then_some(s)),
        );
        let correction_parity = self.decoder.correction_parity(&self.defects)?;
        Ok(error_parity ^ correction_parity)
    }
}

/// Wilson score interval for `failures` out of `shots` at normal quantile `z`.
pub fn wilson_interval(failures: u64, shots: u64, z: f64) -> (f64, f64) {
    let n = shots as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    let low = (centre - half).max(0.0).min(p);
    let high = (centre + half).min(1.0).max(p);
    (low, high)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub shots: u64,
    pub failures: u64,
    pub saturated: u64,
    pub point_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn from_counts(shots: u64, counts: ShotCounts, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(counts.failures, shots, Z_95);
        Self {
            shots,
            failures: counts.failures,
            saturated: counts.saturated,
            point_estimate: counts.failures as f64 / shots as f64,
            ci_low,
            ci_high,
            seed,
        }
    }

    /// Wilson interval at an arbitrary quantile.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.failures, self.shots, z)
    }
}

/// Serial estimate of the logical error rate at `(d, p)`.
pub fn sample_logical_error_rate(
    distance: u32,
    p: f64,
    shots: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, SampleError> {
    if shots == 0 {
        return Err(SampleError::ZeroShots);
    }
    let sampler = ShotSampler::new(distance, p, seed)?;
    Ok(MonteCarloEstimate::from_counts(
        shots,
        sampler.run(0..shots),
        seed,
    ))
}

/// Exact decoder failure probability at d = 3 by enumerating all 2^9 error
/// patterns through the same matcher and tie-breaking the sampler uses.
pub fn exact_logical_error_rate_d3(p: f64) -> Result<f64, SampleError> {
    check_probability(p)?;
    let layout = RotatedSurfaceLayout::new(3)?;
    let graph = MatchingGraph::new(&layout);
    let mut decoder = Decoder::new(&graph);
    let n = layout.num_data_qubits();
    let mut failing_by_weight = [0u32; 10];
    for mask in 0u64..1 << n {
        let error = ErrorPattern::from_mask(mask);
        let syndrome = layout
            .syndrome_of(&error)
            .expect("mask stays within the layout");
        let matching = decoder
            .matching(syndrome.defects())
            .expect("d = 3 has at most 4 defects");
        let residual = error.symmetric_difference(&decoder.correction(&matching));
        if layout
            .is_logical_flip(&residual)
            .expect("correction clears the syndrome")
        {
            failing_by_weight[error.weight()] += 1;
        }
    }
    Ok(failing_by_weight
        .iter()
        .enumerate()
        .map(|(w, &count)| {
            f64::from(count) * libm::pow(p, w as f64) * libm::pow(1.0 - p, (n - w) as f64)
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub distance: u32,
    pub p: f64,
    pub estimate: MonteCarloEstimate,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Rows at one distance, in ascending `p`.
    pub fn curve(&self, distance: u32) -> Vec<SweepRow> {
        let mut rows: Vec<SweepRow> = self
            .rows
            .iter()
            .filter(|r| r.distance == distance)
            .copied()
            .collect();
        rows.sort_by(|a, b| a.p.total_cmp(&b.p));
        rows
    }

    pub fn get(&self, distance: u32, p: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.distance == distance && r.p.to_bits() == p.to_bits())
    }
}

fn dedup_keep_first<T: Copy>(items: &[T], same: impl Fn(&T, &T) -> bool) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for item in items {
        if !out.iter().any(|seen| same(seen, item)) {
            out.push(*item);
        }
    }
    out
}

/// Cartesian sweep with a caller-supplied shot runner (e.g. a parallel one).
/// Cell seeds come from `(seed, d, index of p in the deduplicated grid)`.
pub fn sweep_with<F>(
    distances: &[u32],
    error_rates: &[f64],
    shots: u64,
    seed: u64,
    mut run: F,
) -> Result<SweepTable, SampleError>
where
    F: FnMut(&ShotSampler, u64) -> ShotCounts,
{
    if shots == 0 {
        return Err(SampleError::ZeroShots);
    }
    let distances = dedup_keep_first(distances, |a, b| a == b);
    let rates = dedup_keep_first(error_rates, |a, b| a.to_bits() == b.to_bits());
    let mut samplers = Vec::with_capacity(distances.len() * rates.len());
    for &d in &distances {
        for (k, &p) in rates.iter().enumerate() {
            samplers.push(ShotSampler::new(d, p, cell_seed(seed, d, k))?);
        }
    }
    let rows = samplers
        .iter()
        .map(|sampler| SweepRow {
            distance: sampler.distance(),
            p: sampler.p(),
            estimate: MonteCarloEstimate::from_counts(shots, run(sampler, shots), sampler.seed()),
        })
        .collect();
    Ok(SweepTable { rows })
}

pub fn sweep(
    distances: &[u32],
    error_rates: &[f64],
    shots: u64,
    seed: u64,
) -> Result<SweepTable, SampleError> {
    sweep_with(distances, error_rates, shots, seed, |sampler, n| {
        sampler.run(0..n)
    })
}

/// Physical error rate where the `larger` distance curve overtakes the
/// `smaller` one, linearly interpolated between shared grid points.
pub fn crossing_point(table: &SweepTable, smaller: u32, larger: u32) -> Option<f64> {
    let small = table.curve(smaller);
    let points: Vec<(f64, f64)> = table
        .curve(larger)
        .iter()
        .filter_map(|row| {
            small
                .iter()
                .find(|s| s.p.to_bits() == row.p.to_bits())
                .map(|s| {
                    (
                        row.p,
                        row.estimate.point_estimate - s.estimate.point_estimate,
                    )
                })
        })
        .collect();
    for pair in points.windows(2) {
        let ((p0, g0), (p1, g1)) = (pair[0], pair[1]);
        if g0 < 0.0 && g1 >= 0.0 {
            return Some(p0 + (p1 - p0) * (-g0) / (g1 - g0));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_never_fails() {
        for d in [3, 5, 7] {
            let est = sample_logical_error_rate(d, 0.0, 10_000, 42).unwrap();
            assert_eq!(est.failures, 0);
            assert_eq!(est.point_estimate, 0.0);
            assert_eq!(est.ci_low, 0.0);
            assert!(est.ci_high > 0.0 && est.ci_high < 1e-3);
        }
    }

    #[test]
    fn repeated_calls_are_identical() {
        let a = sample_logical_error_rate(5, 0.08, 20_000, 7).unwrap();
        let b = sample_logical_error_rate(5, 0.08, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_logical_error_rate(5, 0.08, 20_000, 8).unwrap();
        assert_ne!(a.failures, c.failures);
    }

    #[test]
    fn split_ranges_sum_to_whole() {
        let sampler = ShotSampler::new(5, 0.1, 99).unwrap();
        let whole = sampler.run(0..6000);
        let parts = sampler.run(0..1234) + sampler.run(1234..4000) + sampler.run(4000..6000);
        assert_eq!(whole, parts);
    }

    #[test]
    fn fast_path_agrees_with_explicit_residual() {
        let sampler = ShotSampler::new(5, 0.12, 3).unwrap();
        let layout = sampler.layout();
        let mut decoder = Decoder::new(sampler.graph());
        let mut worker = sampler.worker();
        for i in 0..3000 {
            let error = sampler.error_for_shot(i);
            let syndrome = layout.syndrome_of(&error).unwrap();
            let matching = decoder.matching(syndrome.defects()).unwrap();
            let residual = error.symmetric_difference(&decoder.correction(&matching));
            let slow = layout.is_logical_flip(&residual).unwrap();
            assert_eq!(worker.run(i..i + 1).failures == 1, slow, "shot {i}");
        }
    }

    #[test]
    fn input_validation() {
        assert_eq!(
            sample_logical_error_rate(3, 0.6, 10, 0),
            Err(SampleError::InvalidProbability(0.6))
        );
        assert!(matches!(
            sample_logical_error_rate(3, f64::NAN, 10, 0),
            Err(SampleError::InvalidProbability(_))
        ));
        assert_eq!(
            sample_logical_error_rate(15, 0.1, 10, 0),
            Err(SampleError::InvalidDistance(15))
        );
        assert_eq!(
            sample_logical_error_rate(4, 0.1, 10, 0),
            Err(SampleError::InvalidDistance(4))
        );
        assert_eq!(
            sample_logical_error_rate(3, 0.1, 0, 0),
            Err(SampleError::ZeroShots)
        );
    }

    #[test]
    fn wilson_interval_bounds() {
        let (lo, hi) = wilson_interval(0, 100, Z_95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_995).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100, Z_95);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((lo + hi - 1.0).abs() < 1e-12);
        let (lo, hi) = wilson_interval(100, 100, Z_95);
        assert_eq!(hi, 1.0);
        assert!(lo < 1.0);
    }

    #[test]
    fn exact_d3_endpoints() {
        assert_eq!(exact_logical_error_rate_d3(0.0).unwrap(), 0.0);
        assert!((exact_logical_error_rate_d3(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(exact_logical_error_rate_d3(0.7).is_err());
    }

    #[test]
    fn sweep_shape_and_dedup() {
        let table = sweep(&[3], &[0.0], 500, 1).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].estimate.failures, 0);

        let table = sweep(&[3, 5, 3], &[0.05, 0.1, 0.05], 200, 1).unwrap();
        assert_eq!(table.rows.len(), 4);
        let keys: Vec<(u32, f64)> = table.rows.iter().map(|r| (r.distance, r.p)).collect();
        assert_eq!(keys, vec![(3, 0.05), (3, 0.1), (5, 0.05), (5, 0.1)]);
    }

    #[test]
    fn crossing_interpolates() {
        let mk = |d, p, f| SweepRow {
            distance: d,
            p,
            estimate: MonteCarloEstimate::from_counts(
                1000,
                ShotCounts {
                    failures: f,
                    saturated: 0,
                },
                0,
            ),
        };
        let table = SweepTable {
            rows: vec![
                mk(3, 0.05, 100),
                mk(3, 0.10, 200),
                mk(5, 0.05, 50),
                mk(5, 0.10, 250),
            ],
        };
        let x = crossing_point(&table, 3, 5).unwrap();
        assert!((x - 0.075).abs() < 1e-12);
        assert_eq!(crossing_point(&table, 3, 7), None);
    }
}
