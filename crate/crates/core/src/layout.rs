//! Rotated surface-code geometry.
//!
//! Coordinates live on a doubled integer lattice: data qubit `(row r, col c)`
//! sits at `(x, y) = (2c + 1, 2r + 1)` and ancillas sit on even coordinates,
//! so the two never collide. The ancilla at `(2i, 2j)` measures a Z check when
//! `i + j` is even and an X check otherwise. Weight-2 Z checks sit on the
//! left/right edges and weight-2 X checks on the top/bottom edges.
//!
//! Only the Z-check / X-error sector is used for decoding. With this
//! orientation an X-error chain is undetectable when it runs top to bottom
//! (see [`RotatedSurfaceLayout::logical_x_support`]), and the logical Z
//! representative is the middle row.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_DISTANCE: u32 = 3;
pub const MAX_DISTANCE: u32 = 25;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("invalid code distance {0}: must be odd and within 3..=25")]
    InvalidDistance(u32),
    #[error("data qubit index {index} out of range for {len} data qubits")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("residual has a non-trivial syndrome ({defects} defects)")]
    NonTrivialSyndrome { defects: usize },
}

/// One stabilizer: its ancilla coordinate and the data qubits it checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilizer {
    pub ancilla: (i32, i32),
    pub qubits: Vec<usize>,
}

impl Stabilizer {
    pub fn weight(&self) -> usize {
        self.qubits.len()
    }
}

/// A set of data qubits carrying an X error. Stored sorted and deduplicated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorPattern {
    flipped: Vec<usize>,
}

impl ErrorPattern {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a pattern from indices. Repeated indices cancel in pairs, as
    /// two X errors on the same qubit do.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut flipped: Vec<usize> = indices.into_iter().collect();
        flipped.sort_unstable();
        let mut out = Vec::with_capacity(flipped.len());
        let mut i = 0;
        while i < flipped.len() {
            let mut j = i;
            while j < flipped.len() && flipped[j] == flipped[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                out.push(flipped[i]);
            }
            i = j;
        }
        Self { flipped: out }
    }

    /// Pattern from a bitmask over the first 64 data qubits.
    pub fn from_mask(mask: u64) -> Self {
        Self {
            flipped: (0..64).filter(|b| mask >> b & 1 == 1).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.flipped
    }

    pub fn weight(&self) -> usize {
        self.flipped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flipped.is_empty()
    }

    pub fn contains(&self, qubit: usize) -> bool {
        self.flipped.binary_search(&qubit).is_ok()
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        Self {
            flipped: sorted_symmetric_difference(&self.flipped, &other.flipped),
        }
    }
}

/// Z checks with odd parity. Stored sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome {
    defects: Vec<usize>,
}

impl Syndrome {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a syndrome from defect indices; repeated indices cancel.
    pub fn from_defects<I: IntoIterator<Item = usize>>(defects: I) -> Self {
        Self {
            defects: ErrorPattern::from_indices(defects).flipped,
        }
    }

    pub fn defects(&self) -> &[usize] {
        &self.defects
    }

    pub fn len(&self) -> usize {
        self.defects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        Self {
            defects: sorted_symmetric_difference(&self.defects, &other.defects),
        }
    }
}

fn sorted_symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Geometry of a distance-`d` rotated surface code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RotatedSurfaceLayout {
    pub distance: u32,
    /// Doubled-lattice coordinates `(x, y)`; index `r * d + c`.
    pub data_qubits: Vec<(i32, i32)>,
    pub z_stabilizers: Vec<Stabilizer>,
    pub x_stabilizers: Vec<Stabilizer>,
    /// Middle row: the logical Z representative, stretching between the
    /// left and right (Z-type) boundaries.
    pub logical_z_support: Vec<usize>,
    /// Middle column: a minimum-weight undetectable X-error chain.
    pub logical_x_support: Vec<usize>,
    /// For each data qubit, the Z checks containing it (one or two).
    #[serde(skip)]
    qubit_z_checks: Vec<Vec<usize>>,
}

impl RotatedSurfaceLayout {
    pub fn new(distance: u32) -> Result<Self, LayoutError> {
        if distance.is_multiple_of(2) || !(MIN_DISTANCE..=MAX_DISTANCE).contains(&distance) {
            return Err(LayoutError::InvalidDistance(distance));
        }
        let d = distance as i32;
        let index = |r: i32, c: i32| (r * d + c) as usize;

        let mut data_qubits = Vec::with_capacity((d * d) as usize);
        for r in 0..d {
            for c in 0..d {
                data_qubits.push((2 * c + 1, 2 * r + 1));
            }
        }

        let mut z_stabilizers = Vec::new();
        let mut x_stabilizers = Vec::new();
        // Row-major over ancilla sites so stabilizer indices are deterministic.
        for j in 0..=d {
            for i in 0..=d {
                let is_z = (i + j) % 2 == 0;
                let on_left_right = i == 0 || i == d;
                let on_top_bottom = j == 0 || j == d;
                if on_left_right && on_top_bottom {
                    continue;
                }
                if (on_left_right && !is_z) || (on_top_bottom && is_z) {
                    continue;
                }
                let mut qubits = Vec::with_capacity(4);
                for r in [j - 1, j] {
                    for c in [i - 1, i] {
                        if (0..d).contains(&r) && (0..d).contains(&c) {
                            qubits.push(index(r, c));
                        }
                    }
                }
                let stabilizer = Stabilizer {
                    ancilla: (2 * i, 2 * j),
                    qubits,
                };
                if is_z {
                    z_stabilizers.push(stabilizer);
                } else {
                    x_stabilizers.push(stabilizer);
                }
            }
        }

        let mut qubit_z_checks = alloc::vec![Vec::new(); data_qubits.len()];
        for (s, stabilizer) in z_stabilizers.iter().enumerate() {
            for &q in &stabilizer.qubits {
                qubit_z_checks[q].push(s);
            }
        }

        let mid = d / 2;
        let logical_z_support = (0..d).map(|c| index(mid, c)).collect();
        let logical_x_support = (0..d).map(|r| index(r, mid)).collect();

        Ok(Self {
            distance,
            data_qubits,
            z_stabilizers,
            x_stabilizers,
            logical_z_support,
            logical_x_support,
            qubit_z_checks,
        })
    }

    pub fn num_data_qubits(&self) -> usize {
        self.data_qubits.len()
    }

    pub fn num_ancillas(&self) -> usize {
        self.z_stabilizers.len() + self.x_stabilizers.len()
    }

    /// Z checks containing `qubit`.
    pub fn z_checks_of(&self, qubit: usize) -> &[usize] {
        &self.qubit_z_checks[qubit]
    }

    pub fn validate(&self, pattern: &ErrorPattern) -> Result<(), LayoutError> {
        let len = self.num_data_qubits();
        match pattern.indices().last() {
            Some(&index) if index >= len => Err(LayoutError::IndexOutOfRange { index, len }),
            _ => Ok(()),
        }
    }

    /// Z checks adjacent to an odd number of flipped data qubits.
    pub fn syndrome_of(&self, pattern: &ErrorPattern) -> Result<Syndrome, LayoutError> {
        self.validate(pattern)?;
        let mut parity = alloc::vec![false; self.z_stabilizers.len()];
        for &q in pattern.indices() {
            for &s in &self.qubit_z_checks[q] {
                parity[s] ^= true;
            }
        }
        Ok(Syndrome {
            defects: parity
                .iter()
                .enumerate()
                .filter_map(|(s, &odd)| odd.then_some(s))
                .collect(),
        })
    }

    /// Whether a syndrome-free residual anticommutes with logical Z, i.e.
    /// overlaps the logical Z support an odd number of times.
    pub fn is_logical_flip(&self, residual: &ErrorPattern) -> Result<bool, LayoutError> {
        let syndrome = self.syndrome_of(residual)?;
        if !syndrome.is_empty() {
            return Err(LayoutError::NonTrivialSyndrome {
                defects: syndrome.len(),
            });
        }
        Ok(self.logical_parity(residual.indices()))
    }

    /// Parity of the overlap between `qubits` and the logical Z support.
    /// No syndrome check.
    pub fn logical_parity(&self, qubits: &[usize]) -> bool {
        let d = self.distance as usize;
        let row = d / 2;
        qubits.iter().filter(|&&q| q / d == row).count() % 2 == 1
    }
}
