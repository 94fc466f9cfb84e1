//! Acquisition-order strategies, looked up by name.
//!
//! An ordering decides the sequence in which patterns are projected. Under
//! compressive acquisition only a prefix of the sequence is measured, so the
//! ordering controls which coefficients survive truncation. Strategies are
//! registered here and selected at runtime by name.

use super::{transition_count, HadamardBasis};
use crate::error::{Error, Result};

/// A rule assigning each acquisition position a natural Sylvester row index.
pub trait OrderingStrategy: Send + Sync {
    /// Registry name, also written into measurement files.
    fn name(&self) -> &'static str;

    /// Ordered position → natural row index. Must be a permutation of
    /// `0..basis.pattern_count()`, computed from the natural rows so the
    /// result does not depend on the basis's current ordering.
    fn permutation(&self, basis: &HadamardBasis) -> Vec<usize>;
}

/// Natural Sylvester row order.
pub struct NaturalOrdering;

impl OrderingStrategy for NaturalOrdering {
    fn name(&self) -> &'static str {
        "natural"
    }

    fn permutation(&self, basis: &HadamardBasis) -> Vec<usize> {
        (0..basis.pattern_count()).collect()
    }
}

/// Ascending 2D transition count, ties broken by natural index.
///
/// Low-transition patterns carry the coarse spatial structure of typical
/// scenes, so measuring them first concentrates signal energy in the early
/// coefficients and a truncated prefix reconstructs a recognisable image.
pub struct Sequency2dOrdering;

impl OrderingStrategy for Sequency2dOrdering {
    fn name(&self) -> &'static str {
        "sequency2d"
    }

    fn permutation(&self, basis: &HadamardBasis) -> Vec<usize> {
        let n = basis.n();
        let mut keyed: Vec<(usize, usize)> = (0..basis.pattern_count())
            .map(|index| {
                let row = basis.natural_row(index);
                let pattern = ndarray::ArrayView2::from_shape((n, n), row.to_slice().unwrap())
                    .expect("row length is always n*n");
                (transition_count(pattern), index)
            })
            .collect();
        keyed.sort_unstable();
        keyed.into_iter().map(|(_, index)| index).collect()
    }
}

static ORDERINGS: [&dyn OrderingStrategy; 2] = [&NaturalOrdering, &Sequency2dOrdering];

/// Names of all registered orderings.
pub fn ordering_names() -> Vec<&'static str> {
    ORDERINGS.iter().map(|o| o.name()).collect()
}

/// Look up a registered ordering by name.
pub fn ordering_by_name(name: &str) -> Result<&'static dyn OrderingStrategy> {
    ORDERINGS
        .iter()
        .copied()
        .find(|o| o.name() == name)
        .ok_or_else(|| Error::UnknownOrdering {
            name: name.to_owned(),
            available: ordering_names().join(", "),
        })
}
