use std::collections::HashMap;

use adaptive_qec_core::{
    Decoder, ErrorPattern, MatchingGraph, RotatedSurfaceLayout, Syndrome, MAX_DEFECTS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum weight of any error pattern producing each syndrome, by enumeration.
fn min_weight_by_syndrome(layout: &RotatedSurfaceLayout) -> HashMap<Vec<usize>, u32> {
    let n = layout.num_data_qubits();
    let mut best: HashMap<Vec<usize>, u32> = HashMap::new();
    for mask in 0u64..(1 << n) {
        let pattern = ErrorPattern::from_mask(mask);
        let syndrome = layout.syndrome_of(&pattern).unwrap();
        let w = mask.count_ones();
        best.entry(syndrome.defects().to_vec())
            .and_modify(|b| *b = (*b).min(w))
            .or_insert(w);
    }
    best
}

#[test]
fn d3_exhaustive_corrections_are_minimum_weight_and_valid() {
    let layout = RotatedSurfaceLayout::new(3).unwrap();
    let graph = MatchingGraph::new(&layout);
    let best = min_weight_by_syndrome(&layout);
    for mask in 0u64..512 {
        let error = ErrorPattern::from_mask(mask);
        let syndrome = layout.syndrome_of(&error).unwrap();
        let correction = graph.decode_mwpm(&syndrome).unwrap();
        assert_eq!(
            layout.syndrome_of(&correction).unwrap(),
            syndrome,
            "mask {mask:#x}"
        );
        assert_eq!(
            correction.weight() as u32,
            best[syndrome.defects()],
            "mask {mask:#x}"
        );
    }
}

#[test]
fn d3_exhaustive_residual_classes() {
    // Every syndrome class holds 2^9 / 2^4 = 32 patterns split evenly
    // between the two logical cosets.
    let layout = RotatedSurfaceLayout::new(3).unwrap();
    let mut classes: HashMap<Vec<usize>, (u32, u32)> = HashMap::new();
    for mask in 0u64..512 {
        let pattern = ErrorPattern::from_mask(mask);
        let syndrome = layout.syndrome_of(&pattern).unwrap();
        let parity = pattern
            .indices()
            .iter()
            .filter(|&&q| layout.logical_z_support.contains(&q))
            .count()
            % 2;
        let entry = classes.entry(syndrome.defects().to_vec()).or_default();
        if parity == 0 {
            entry.0 += 1;
        } else {
            entry.1 += 1;
        }
    }
    assert_eq!(classes.len(), 16);
    assert!(classes.values().all(|&c| c == (16, 16)));
}

#[test]
fn no_undetectable_logical_below_distance() {
    for d in [3u32, 5] {
        let layout = RotatedSurfaceLayout::new(d).unwrap();
        let n = layout.num_data_qubits();
        // enumerate all patterns of weight < d
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
        while let Some((start, chosen)) = stack.pop() {
            if !chosen.is_empty() {
                let pattern = ErrorPattern::from_indices(chosen.iter().copied());
                if layout.syndrome_of(&pattern).unwrap().is_empty() {
                    assert!(
                        !layout.is_logical_flip(&pattern).unwrap(),
                        "d={d}: weight-{} logical {chosen:?}",
                        chosen.len()
                    );
                }
            }
            if chosen.len() + 1 < d as usize {
                for q in start..n {
                    let mut next = chosen.clone();
                    next.push(q);
                    stack.push((q + 1, next));
                }
            }
        }
        let chain = ErrorPattern::from_indices(layout.logical_x_support.iter().copied());
        assert_eq!(chain.weight(), d as usize);
        assert!(layout.syndrome_of(&chain).unwrap().is_empty());
        assert!(layout.is_logical_flip(&chain).unwrap());
    }
}

#[test]
fn random_syndromes_decode_to_valid_corrections() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [3u32, 5, 7, 9, 11, 13] {
        let layout = RotatedSurfaceLayout::new(d).unwrap();
        let graph = MatchingGraph::new(&layout);
        let checks = graph.num_checks();
        let max_defects = MAX_DEFECTS.min(checks);
        for _ in 0..10_000 {
            let k = rng.gen_range(0..=max_defects.min(8));
            let mut defects: Vec<usize> = (0..k).map(|_| rng.gen_range(0..checks)).collect();
            defects.sort_unstable();
            defects.dedup();
            let syndrome = Syndrome::from_defects(defects);
            let correction = graph.decode_mwpm(&syndrome).unwrap();
            assert_eq!(layout.syndrome_of(&correction).unwrap(), syndrome);
        }
    }
}

#[test]
fn d5_corrects_every_pattern_up_to_weight_two() {
    let layout = RotatedSurfaceLayout::new(5).unwrap();
    let graph = MatchingGraph::new(&layout);
    let n = layout.num_data_qubits();
    for a in 0..n {
        for b in a..n {
            let error = ErrorPattern::from_indices([a, b]);
            let syndrome = layout.syndrome_of(&error).unwrap();
            let correction = graph.decode_mwpm(&syndrome).unwrap();
            let residual = error.symmetric_difference(&correction);
            assert!(!layout.is_logical_flip(&residual).unwrap(), "{a},{b}");
        }
    }
}

#[test]
fn fast_parity_agrees_with_explicit_correction() {
    let layout = RotatedSurfaceLayout::new(7).unwrap();
    let graph = MatchingGraph::new(&layout);
    let mut decoder = Decoder::new(&graph);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2_000 {
        let error = ErrorPattern::from_indices(
            (0..layout.num_data_qubits()).filter(|_| rng.gen_bool(0.08)),
        );
        let syndrome = layout.syndrome_of(&error).unwrap();
        if syndrome.len() > MAX_DEFECTS {
            continue;
        }
        let correction = graph.decode_mwpm(&syndrome).unwrap();
        let explicit = layout.logical_parity(correction.indices());
        assert_eq!(
            decoder.correction_parity(syndrome.defects()).unwrap(),
            explicit
        );
    }
}
