use adaptive_qec_core::{
    crossing_point, exact_logical_error_rate_d3, sample_logical_error_rate, sweep, wilson_interval,
    ErrorPattern, MatchingGraph, RotatedSurfaceLayout,
};

/// Failing-pattern counts by weight for the d=3 decoder, by enumeration.
fn d3_failure_polynomial() -> [u64; 10] {
    let layout = RotatedSurfaceLayout::new(3).unwrap();
    let graph = MatchingGraph::new(&layout);
    let mut counts = [0u64; 10];
    for mask in 0u64..512 {
        let error = ErrorPattern::from_mask(mask);
        let correction = graph
            .decode_mwpm(&layout.syndrome_of(&error).unwrap())
            .unwrap();
        if layout
            .is_logical_flip(&error.symmetric_difference(&correction))
            .unwrap()
        {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    counts
}

#[test]
fn exact_d3_matches_failure_polynomial() {
    let counts = d3_failure_polynomial();
    assert_eq!(counts[0], 0);
    assert_eq!(counts[1], 0);
    for p in [0.001f64, 0.01, 0.05, 0.1, 0.3] {
        let poly: f64 = counts
            .iter()
            .enumerate()
            .map(|(w, &c)| c as f64 * p.powi(w as i32) * (1.0 - p).powi(9 - w as i32))
            .sum();
        let exact = exact_logical_error_rate_d3(p).unwrap();
        assert!((exact - poly).abs() <= 1e-14, "p={p}: {exact} vs {poly}");
    }
}

#[test]
fn exact_d3_at_five_percent_is_frozen() {
    let exact = exact_logical_error_rate_d3(0.05).unwrap();
    assert!((exact - EXACT_D3_AT_0_05).abs() < 1e-15, "{exact:.17e}");
}

const EXACT_D3_AT_0_05: f64 = 3.686_443_193_75e-2;

#[test]
fn d3_estimate_within_three_sigma_of_exact() {
    let est = sample_logical_error_rate(3, 0.05, 100_000, 2024).unwrap();
    let (lo, hi) = wilson_interval(est.failures, est.shots, 3.0);
    let exact = exact_logical_error_rate_d3(0.05).unwrap();
    assert!(lo <= exact && exact <= hi, "{exact} not in [{lo}, {hi}]");
}

#[test]
fn suppression_below_threshold() {
    let table = sweep(&[3, 5, 7], &[0.03], 200_000, 7).unwrap();
    let rates: Vec<f64> = [3, 5, 7]
        .iter()
        .map(|&d| table.get(d, 0.03).unwrap().estimate.point_estimate)
        .collect();
    assert!(rates[0] > rates[1] && rates[1] > rates[2], "{rates:?}");
}

#[test]
fn d3_d5_crossing_in_code_capacity_window() {
    let grid: Vec<f64> = (0..12).map(|i| 0.04 + 0.01 * i as f64).collect();
    let table = sweep(&[3, 5], &grid, 40_000, 99).unwrap();
    let p = crossing_point(&table, 3, 5).expect("curves cross");
    assert!((0.07..=0.14).contains(&p), "crossing at {p}");
}
