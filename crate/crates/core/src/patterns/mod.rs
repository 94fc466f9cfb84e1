//! Sylvester–Hadamard pattern basis, pattern orderings, and the binary
//! amplitude masks a physical modulator realises.
//!
//! The sensing matrix `H` is the N×N Sylvester–Hadamard matrix, N = n² for an
//! n×n pixel grid. Each row, reshaped row-major to n×n, is one illumination
//! pattern. Acquisition order is a pluggable [`OrderingStrategy`]; see
//! [`ordering`] for the registry. A physical modulator cannot realise ±1
//! field values — it passes `1.0` in open regions and a residual amplitude
//! `a_block = sqrt(1 − μ)` in blocked ones, where μ is the fraction of THz
//! energy removed.

mod ordering;

pub use ordering::{
    ordering_by_name, ordering_names, NaturalOrdering, OrderingStrategy, Sequency2dOrdering,
};

use crate::error::{Error, Result};
use ndarray::{s, Array2, ArrayView1, ArrayView2};
use std::sync::Arc;

/// Ordered set of ±1 pattern rows forming the sensing matrix.
///
/// Rows are stored in natural Sylvester order; `ordering` maps an ordered
/// position to a natural row index. Clones share the underlying matrix.
#[derive(Debug, Clone)]
pub struct HadamardBasis {
    n: usize,
    rows: Arc<Array2<i8>>,
    ordering: Arc<Vec<usize>>,
    ordering_name: String,
}

impl HadamardBasis {
    /// Side length of the pixel grid.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of patterns, N = n².
    pub fn pattern_count(&self) -> usize {
        self.n * self.n
    }

    pub fn ordering_name(&self) -> &str {
        &self.ordering_name
    }

    /// Ordered position → natural Sylvester row index.
    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    /// Row at a natural Sylvester index.
    pub fn natural_row(&self, index: usize) -> ArrayView1<'_, i8> {
        self.rows.row(index)
    }

    /// Row at an ordered position.
    pub fn row(&self, ordered_index: usize) -> ArrayView1<'_, i8> {
        self.rows.row(self.ordering[ordered_index])
    }

    /// Entry of the ordered row at a flattened pixel index.
    pub fn entry(&self, ordered_index: usize, pixel: usize) -> i8 {
        self.rows[[self.ordering[ordered_index], pixel]]
    }

    /// Ordered row reshaped to the n×n pixel grid (row-major).
    pub fn pattern(&self, ordered_index: usize) -> Array2<i8> {
        let row = self.row(ordered_index);
        Array2::from_shape_vec((self.n, self.n), row.to_vec())
            .expect("row length is always n*n")
    }

    /// Same basis under a different acquisition order. The pattern matrix is
    /// shared, not copied.
    pub fn with_ordering(&self, strategy: &dyn OrderingStrategy) -> HadamardBasis {
        let permutation = strategy.permutation(self);
        debug_assert_eq!(permutation.len(), self.pattern_count());
        HadamardBasis {
            n: self.n,
            rows: Arc::clone(&self.rows),
            ordering: Arc::new(permutation),
            ordering_name: strategy.name().to_owned(),
        }
    }
}

/// Build the N×N Sylvester–Hadamard basis in natural order, N = 2^log2_n.
///
/// `log2_n` must be even (so the patterns tile a square pixel grid) and at
/// most 16 (beyond that the dense matrix no longer fits in memory at desk
/// scale).
pub fn sylvester_hadamard(log2_n: u32) -> Result<HadamardBasis> {
    if !log2_n.is_multiple_of(2) {
        return Err(Error::OddPatternExponent(log2_n));
    }
    if log2_n > 16 {
        return Err(Error::PatternSetTooLarge(log2_n));
    }
    let pattern_count = 1usize << log2_n;
    let n = 1usize << (log2_n / 2);
    Ok(HadamardBasis {
        n,
        rows: Arc::new(sylvester_matrix(pattern_count)),
        ordering: Arc::new((0..pattern_count).collect()),
        ordering_name: NaturalOrdering.name().to_owned(),
    })
}

/// Sylvester recursion H_{2k} = [[H_k, H_k], [H_k, -H_k]], H_1 = [1].
fn sylvester_matrix(size: usize) -> Array2<i8> {
    let mut h = Array2::from_elem((1, 1), 1i8);
    while h.nrows() < size {
        let k = h.nrows();
        let mut next = Array2::zeros((2 * k, 2 * k));
        next.slice_mut(s![..k, ..k]).assign(&h);
        next.slice_mut(s![..k, k..]).assign(&h);
        next.slice_mut(s![k.., ..k]).assign(&h);
        next.slice_mut(s![k.., k..]).assign(&h.mapv(|v| -v));
        h = next;
    }
    h
}

/// Reorder the basis so pattern spatial frequency (transition count)
/// increases along the acquisition sequence.
pub fn order_sequency2d(basis: &HadamardBasis) -> HadamardBasis {
    basis.with_ordering(&Sequency2dOrdering)
}

/// Number of sign changes between horizontally plus vertically adjacent
/// entries of a ±1 pattern. A proxy for its spatial-frequency content.
pub fn transition_count(pattern: ArrayView2<'_, i8>) -> usize {
    let (rows, cols) = pattern.dim();
    let mut count = 0;
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols && pattern[[r, c]] != pattern[[r, c + 1]] {
                count += 1;
            }
            if r + 1 < rows && pattern[[r, c]] != pattern[[r + 1, c]] {
                count += 1;
            }
        }
    }
    count
}

/// One physical amplitude mask: `1.0` where the pattern is open, `a_block`
/// where it is blocked.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask2D {
    n: usize,
    values: Array2<f64>,
}

impl Mask2D {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Amplitude factor at a flattened (row-major) pixel index.
    pub fn amplitude(&self, pixel: usize) -> f64 {
        self.values[[pixel / self.n, pixel % self.n]]
    }
}

/// Blocked-region field amplitude for an energy modulation depth μ.
pub fn blocked_amplitude(modulation_depth: f64) -> Result<f64> {
    if !(modulation_depth > 0.0 && modulation_depth <= 1.0) {
        return Err(Error::InvalidModulationDepth(modulation_depth));
    }
    Ok((1.0 - modulation_depth).sqrt())
}

/// Amplitude mask for the ordered pattern at `ordered_index`: +1 entries map
/// to `1.0`, −1 entries to `sqrt(1 − modulation_depth)`.
pub fn mask_from_row(
    basis: &HadamardBasis,
    ordered_index: usize,
    modulation_depth: f64,
) -> Result<Mask2D> {
    let count = basis.pattern_count();
    if ordered_index >= count {
        return Err(Error::PatternIndexOutOfRange {
            index: ordered_index,
            count,
        });
    }
    let a_block = blocked_amplitude(modulation_depth)?;
    let n = basis.n();
    let row = basis.row(ordered_index);
    let values = Array2::from_shape_fn((n, n), |(r, c)| {
        if row[r * n + c] > 0 {
            1.0
        } else {
            a_block
        }
    });
    Ok(Mask2D { n, values })
}

/// The full ordered set of amplitude masks for one basis and modulation
/// depth.
#[derive(Debug, Clone)]
pub struct BinaryMaskSet {
    basis: HadamardBasis,
    modulation_depth: f64,
    a_block: f64,
    masks: Vec<Mask2D>,
}

impl BinaryMaskSet {
    pub fn new(basis: &HadamardBasis, modulation_depth: f64) -> Result<Self> {
        let a_block = blocked_amplitude(modulation_depth)?;
        let masks = (0..basis.pattern_count())
            .map(|i| mask_from_row(basis, i, modulation_depth))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            basis: basis.clone(),
            modulation_depth,
            a_block,
            masks,
        })
    }

    pub fn basis(&self) -> &HadamardBasis {
        &self.basis
    }

    pub fn modulation_depth(&self) -> f64 {
        self.modulation_depth
    }

    pub fn a_block(&self) -> f64 {
        self.a_block
    }

    pub fn masks(&self) -> &[Mask2D] {
        &self.masks
    }

    pub fn mask(&self, ordered_index: usize) -> &Mask2D {
        &self.masks[ordered_index]
    }
}
