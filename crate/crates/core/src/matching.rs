//! Exact minimum-weight perfect matching on the Z-check defect graph.
//!
//! Nodes are the Z checks plus one virtual boundary node. An edge is a data
//! qubit: it joins the one or two Z checks it belongs to, with qubits on the
//! top/bottom rows joining their single check to the boundary. Pair weights
//! are shortest-path lengths, so they form a metric.
//!
//! The matcher enumerates pairings with a dynamic program over defect
//! subsets, which is exact and deterministic up to [`MAX_DEFECTS`] defects.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::layout::{ErrorPattern, RotatedSurfaceLayout, Syndrome};

/// Largest defect count the subset enumeration accepts.
pub const MAX_DEFECTS: usize = 20;

const BOUNDARY_CHOICE: u8 = u8::MAX;
const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("{0} defects exceed the exact matching bound of {MAX_DEFECTS}")]
    TooManyDefects(usize),
    #[error("defect {defect} is not a Z check of this graph ({checks} checks)")]
    UnknownDefect { defect: usize, checks: usize },
}

/// All-pairs shortest chains between Z checks and the boundary.
#[derive(Debug, Clone)]
pub struct MatchingGraph {
    num_checks: usize,
    num_data_qubits: usize,
    /// Row-major `(num_checks + 1)^2` distances; the last node is the boundary.
    weights: Vec<u32>,
    /// One minimum-length chain per unordered pair, stored at `(min, max)`.
    chains: Vec<Vec<usize>>,
    /// Logical-Z overlap parity of each stored chain.
    chain_parity: Vec<bool>,
}

impl MatchingGraph {
    pub fn new(layout: &RotatedSurfaceLayout) -> Self {
        let num_checks = layout.z_stabilizers.len();
        let nodes = num_checks + 1;
        let boundary = num_checks;

        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
        for q in 0..layout.num_data_qubits() {
            let (a, b) = match *layout.z_checks_of(q) {
                [a] => (a, boundary),
                [a, b] => (a, b),
                _ => unreachable!("data qubit {q} must sit in one or two Z checks"),
            };
            adjacency[a].push((b, q));
            adjacency[b].push((a, q));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let mut weights = vec![UNREACHABLE; nodes * nodes];
        let mut chains = vec![Vec::new(); nodes * nodes];
        let mut chain_parity = vec![false; nodes * nodes];
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
        let mut dist = vec![UNREACHABLE; nodes];
        let mut queue = VecDeque::with_capacity(nodes);

        for source in 0..nodes {
            dist.iter_mut().for_each(|x| *x = UNREACHABLE);
            parent.iter_mut().for_each(|x| *x = None);
            dist[source] = 0;
            queue.push_back(source);
            while let Some(u) = queue.pop_front() {
                for &(v, q) in &adjacency[u] {
                    if dist[v] == UNREACHABLE {
                        dist[v] = dist[u] + 1;
                        parent[v] = Some((u, q));
                        queue.push_back(v);
                    }
                }
            }
            for target in 0..nodes {
                weights[source * nodes + target] = dist[target];
                if target > source {
                    let mut chain = Vec::with_capacity(dist[target] as usize);
                    let mut v = target;
                    while let Some((u, q)) = parent[v] {
                        chain.push(q);
                        v = u;
                    }
                    chain.sort_unstable();
                    let idx = source * nodes + target;
                    chain_parity[idx] = layout.logical_parity(&chain);
                    chains[idx] = chain;
                }
            }
        }

        Self {
            num_checks,
            num_data_qubits: layout.num_data_qubits(),
            weights,
            chains,
            chain_parity,
        }
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    /// Index of the virtual boundary node.
    pub fn boundary(&self) -> usize {
        self.num_checks
    }

    fn nodes(&self) -> usize {
        self.num_checks + 1
    }

    /// Shortest-chain length between two nodes (either may be the boundary).
    pub fn weight(&self, a: usize, b: usize) -> u32 {
        self.weights[a * self.nodes() + b]
    }

    fn pair_index(&self, a: usize, b: usize) -> usize {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        lo * self.nodes() + hi
    }

    /// One concrete minimum-length chain joining two nodes.
    pub fn chain(&self, a: usize, b: usize) -> &[usize] {
        &self.chains[self.pair_index(a, b)]
    }

    fn chain_logical_parity(&self, a: usize, b: usize) -> bool {
        self.chain_parity[self.pair_index(a, b)]
    }

    /// Minimum-weight correction for `syndrome`, allocating fresh scratch.
    pub fn decode_mwpm(&self, syndrome: &Syndrome) -> Result<ErrorPattern, DecodeError> {
        let mut decoder = Decoder::new(self);
        let matching = decoder.matching(syndrome.defects())?;
        Ok(decoder.correction(&matching))
    }

    pub fn num_data_qubits(&self) -> usize {
        self.num_data_qubits
    }
}

/// A perfect matching of defects: each defect paired with another defect
/// (`Some`) or the boundary (`None`). Pairs are listed by their lower defect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(usize, Option<usize>)>,
    pub weight: u32,
}

/// Reusable subset-DP matcher over a borrowed graph.
#[derive(Debug)]
pub struct Decoder<'g> {
    graph: &'g MatchingGraph,
    cost: Vec<u32>,
    choice: Vec<u8>,
}

impl<'g> Decoder<'g> {
    pub fn new(graph: &'g MatchingGraph) -> Self {
        Self {
            graph,
            cost: Vec::new(),
            choice: Vec::new(),
        }
    }

    pub fn graph(&self) -> &'g MatchingGraph {
        self.graph
    }

    /// Fills the DP tables for `defects` (sorted, distinct Z-check indices).
    fn solve(&mut self, defects: &[usize]) -> Result<(), DecodeError> {
        let k = defects.len();
        if k > MAX_DEFECTS {
            return Err(DecodeError::TooManyDefects(k));
        }
        if let Some(&defect) = defects.iter().find(|&&d| d >= self.graph.num_checks) {
            return Err(DecodeError::UnknownDefect {
                defect,
                checks: self.graph.num_checks,
            });
        }
        let size = 1usize << k;
        if self.cost.len() < size {
            self.cost.resize(size, 0);
            self.choice.resize(size, 0);
        }
        let boundary = self.graph.boundary();
        self.cost[0] = 0;
        for mask in 1..size {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << i);
            let mut best = UNREACHABLE;
            let mut pick = BOUNDARY_CHOICE;
            // Partners in ascending order with strict improvement, boundary
            // last: the lexicographically smallest optimal pairing wins.
            let mut bits = rest;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let c = self.graph.weight(defects[i], defects[j]) + self.cost[rest & !(1 << j)];
                if c < best {
                    best = c;
                    pick = j as u8;
                }
            }
            let c = self.graph.weight(defects[i], boundary) + self.cost[rest];
            if c < best {
                best = c;
                pick = BOUNDARY_CHOICE;
            }
            self.cost[mask] = best;
            self.choice[mask] = pick;
        }
        Ok(())
    }

    fn walk(&self, defects: &[usize], mut visit: impl FnMut(usize, Option<usize>)) {
        let mut mask = (1usize << defects.len()) - 1;
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            let pick = self.choice[mask];
            mask &= !(1 << i);
            match pick {
                BOUNDARY_CHOICE => visit(defects[i], None),
                j => {
                    mask &= !(1 << j);
                    visit(defects[i], Some(defects[j as usize]));
                }
            }
        }
    }

    /// Minimum-weight matching of `defects` (sorted, distinct).
    pub fn matching(&mut self, defects: &[usize]) -> Result<Matching, DecodeError> {
        if defects.is_empty() {
            return Ok(Matching {
                pairs: Vec::new(),
                weight: 0,
            });
        }
        self.solve(defects)?;
        let mut pairs = Vec::with_capacity(defects.len());
        self.walk(defects, |a, b| pairs.push((a, b)));
        Ok(Matching {
            pairs,
            weight: self.cost[(1usize << defects.len()) - 1],
        })
    }

    /// Union (mod 2) of the chains realizing `matching`.
    pub fn correction(&self, matching: &Matching) -> ErrorPattern {
        let boundary = self.graph.boundary();
        ErrorPattern::from_indices(
            matching
                .pairs
                .iter()
                .flat_map(|&(a, b)| self.graph.chain(a, b.unwrap_or(boundary)).iter().copied()),
        )
    }

    /// Logical-Z parity of the correction for `defects`, without building it.
    pub fn correction_parity(&mut self, defects: &[usize]) -> Result<bool, DecodeError> {
        if defects.is_empty() {
            return Ok(false);
        }
        self.solve(defects)?;
        let boundary = self.graph.boundary();
        let mut parity = false;
        self.walk(defects, |a, b| {
            parity ^= self.graph.chain_logical_parity(a, b.unwrap_or(boundary));
        });
        Ok(parity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(d: u32) -> (RotatedSurfaceLayout, MatchingGraph) {
        let layout = RotatedSurfaceLayout::new(d).unwrap();
        let graph = MatchingGraph::new(&layout);
        (layout, graph)
    }

    #[test]
    fn weights_form_a_metric() {
        for d in [3u32, 5, 7] {
            let (layout, g) = graph(d);
            let n = g.num_checks() + 1;
            for a in 0..n {
                assert_eq!(g.weight(a, a), 0);
                for b in 0..n {
                    assert_eq!(g.weight(a, b), g.weight(b, a));
                    if a != b {
                        assert!(g.weight(a, b) > 0 && g.weight(a, b) != UNREACHABLE);
                        assert_eq!(g.chain(a, b).len() as u32, g.weight(a, b));
                    }
                    for c in 0..n {
                        assert!(g.weight(a, c) <= g.weight(a, b) + g.weight(b, c));
                    }
                }
            }
            // chain realizations have exactly their endpoints as syndrome
            for a in 0..g.num_checks() {
                for b in a + 1..=g.num_checks() {
                    let chain = ErrorPattern::from_indices(g.chain(a, b).iter().copied());
                    let syndrome = layout.syndrome_of(&chain).unwrap();
                    let expected: Vec<usize> = if b == g.boundary() {
                        vec![a]
                    } else {
                        vec![a, b]
                    };
                    assert_eq!(syndrome.defects(), &expected[..]);
                }
            }
        }
    }

    #[test]
    fn empty_syndrome_decodes_to_nothing() {
        let (_, g) = graph(5);
        assert!(g.decode_mwpm(&Syndrome::empty()).unwrap().is_empty());
    }

    #[test]
    fn single_boundary_defect_uses_one_qubit() {
        let (layout, g) = graph(3);
        // qubit 0 (top-left corner) sits in exactly one Z check
        let syndrome = layout
            .syndrome_of(&ErrorPattern::from_indices([0]))
            .unwrap();
        assert_eq!(syndrome.len(), 1);
        let correction = g.decode_mwpm(&syndrome).unwrap();
        assert_eq!(correction.weight(), 1);
        assert_eq!(layout.syndrome_of(&correction).unwrap(), syndrome);
    }

    #[test]
    fn adjacent_defects_pair_directly() {
        let (layout, g) = graph(3);
        // centre qubit 4 flips two bulk Z checks; pairing costs 1, two
        // boundary chains cost more
        let syndrome = layout
            .syndrome_of(&ErrorPattern::from_indices([4]))
            .unwrap();
        assert_eq!(syndrome.len(), 2);
        let mut decoder = Decoder::new(&g);
        let m = decoder.matching(syndrome.defects()).unwrap();
        assert_eq!(m.weight, 1);
        assert_eq!(
            m.pairs,
            vec![(syndrome.defects()[0], Some(syndrome.defects()[1]))]
        );
        assert_eq!(decoder.correction(&m).indices(), &[4]);
    }

    #[test]
    fn too_many_defects() {
        let (_, g) = graph(9);
        let defects: Vec<usize> = (0..21).collect();
        let mut decoder = Decoder::new(&g);
        assert_eq!(
            decoder.matching(&defects),
            Err(DecodeError::TooManyDefects(21))
        );
        assert!(decoder.matching(&defects[..20]).is_ok());
    }

    #[test]
    fn unknown_defect() {
        let (_, g) = graph(3);
        let mut decoder = Decoder::new(&g);
        assert!(matches!(
            decoder.matching(&[4]),
            Err(DecodeError::UnknownDefect { defect: 4, .. })
        ));
    }

    #[test]
    fn parity_fast_path_matches_correction() {
        let (layout, g) = graph(5);
        let mut decoder = Decoder::new(&g);
        for mask in (0u64..1 << 25).step_by(7919).take(2000) {
            let e = ErrorPattern::from_mask(mask);
            let s = layout.syndrome_of(&e).unwrap();
            let m = decoder.matching(s.defects()).unwrap();
            let c = decoder.correction(&m);
            assert_eq!(
                decoder.correction_parity(s.defects()).unwrap(),
                layout.logical_parity(c.indices())
            );
        }
    }
}
