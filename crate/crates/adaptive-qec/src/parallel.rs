//! Rayon-backed shot execution. Shots are split into fixed blocks and the
//! integer tallies summed, so counts never depend on the worker count.

use adaptive_qec_core::sampling::{self, ShotCounts, ShotSampler};
use adaptive_qec_core::{MonteCarloEstimate, SampleError, SweepTable};
use rayon::prelude::*;

const BLOCK: u64 = 4096;

pub fn run_shots(sampler: &ShotSampler, shots: u64) -> ShotCounts {
    let blocks = shots.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map_init(
            || sampler.worker(),
            |worker, b| worker.run(b * BLOCK..((b + 1) * BLOCK).min(shots)),
        )
        .reduce(ShotCounts::default, |a, b| a + b)
}

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
        run_shots(&sampler, shots),
        seed,
    ))
}

pub fn sweep(
    distances: &[u32],
    error_rates: &[f64],
    shots: u64,
    seed: u64,
) -> Result<SweepTable, SampleError> {
    sampling::sweep_with(distances, error_rates, shots, seed, run_shots)
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_serial_at_any_thread_count() {
        let serial = adaptive_qec_core::sample_logical_error_rate(5, 0.09, 30_001, 11).unwrap();
        for threads in [1, 2, 3, 8] {
            let par =
                with_threads(threads, || sample_logical_error_rate(5, 0.09, 30_001, 11)).unwrap();
            assert_eq!(par, serial, "threads = {threads}");
        }
    }
}
