//! Recovery of per-pixel waveforms from single-pixel records.
//!
//! Acquisition obeys `W(t) = H·S(t)` once the binary-mask records are
//! debiased into true ±1-pattern coefficients. Because `Hᵀ·H = N·I`, full
//! inversion is the scaled transpose `S = (1/N)·Hᵀ·W`, applied independently
//! at every time sample. Compressive inversion zero-fills the unmeasured
//! coefficients and applies the same adjoint: a truncated orthogonal
//! expansion, no iterations involved.

use crate::error::{Error, Result};
use crate::patterns::{blocked_amplitude, HadamardBasis};
use crate::simulator::{DataCube, MeasurementSet, TimeGrid};
use ndarray::Array2;
use rayon::prelude::*;

/// Hadamard-domain coefficient rows `(H·S)(t)` for the first m ordered
/// patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pattern_count: usize,
    ordering_name: String,
    grid: TimeGrid,
    coeffs: Array2<f64>,
}

impl CoefficientSet {
    pub fn new(
        pattern_count: usize,
        ordering_name: impl Into<String>,
        grid: TimeGrid,
        coeffs: Array2<f64>,
    ) -> Result<Self> {
        let m = coeffs.nrows();
        if m < 1 || m > pattern_count {
            return Err(Error::MeasurementCountOutOfRange {
                m,
                max: pattern_count,
            });
        }
        if coeffs.ncols() != grid.nt() {
            return Err(Error::DimensionMismatch(format!(
                "coefficients have {} time samples, grid expects {}",
                coeffs.ncols(),
                grid.nt()
            )));
        }
        Ok(Self {
            pattern_count,
            ordering_name: ordering_name.into(),
            grid,
            coeffs,
        })
    }

    /// Full pattern count N of the underlying basis.
    pub fn pattern_count(&self) -> usize {
        self.pattern_count
    }

    pub fn ordering_name(&self) -> &str {
        &self.ordering_name
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// Number of available coefficient rows m.
    pub fn m(&self) -> usize {
        self.coeffs.nrows()
    }

    /// m × nt coefficient matrix in acquisition order.
    pub fn coeffs(&self) -> &Array2<f64> {
        &self.coeffs
    }

    /// Copy restricted to the first `m` ordered coefficients.
    pub fn truncate(&self, m: usize) -> Result<CoefficientSet> {
        if m < 1 || m > self.m() {
            return Err(Error::MeasurementCountOutOfRange { m, max: self.m() });
        }
        CoefficientSet::new(
            self.pattern_count,
            self.ordering_name.clone(),
            self.grid,
            self.coeffs.slice(ndarray::s![..m, ..]).to_owned(),
        )
    }
}

/// Affine correction turning binary-mask records into ±1-pattern
/// coefficients.
///
/// A mask with blocked amplitude `a = √(1−μ)` acts as
/// `((1+a)/2)·1 + ((1−a)/2)·H_row`, so with the all-open record as row 0:
/// `coeff_i = (2/(1−a))·(record_i − ((1+a)/2)·record_0)` for i ≥ 1, while
/// `coeff_0 = record_0` verbatim. μ = 0 leaves no pattern information to
/// recover and is rejected.
pub fn debias(meas: &MeasurementSet) -> Result<CoefficientSet> {
    let mu = meas.modulation_depth();
    if mu <= 0.0 {
        return Err(Error::ZeroModulationDepth);
    }
    let a = blocked_amplitude(mu)?;
    let gain = 2.0 / (1.0 - a);
    let bias = (1.0 + a) / 2.0;

    let records = meas.records();
    let mut coeffs = records.clone();
    let (reference, mut rest) = coeffs.view_mut().split_at(ndarray::Axis(0), 1);
    let reference = reference.row(0);
    for mut row in rest.outer_iter_mut() {
        for (c, &r0) in row.iter_mut().zip(reference) {
            *c = gain * (*c - bias * r0);
        }
    }

    CoefficientSet::new(
        meas.pattern_count(),
        meas.ordering_name(),
        meas.grid(),
        coeffs,
    )
}

fn check_basis(basis: &HadamardBasis, coeffs: &CoefficientSet) -> Result<()> {
    if basis.pattern_count() != coeffs.pattern_count() {
        return Err(Error::BasisMismatch(format!(
            "basis has N = {}, coefficients expect N = {}",
            basis.pattern_count(),
            coeffs.pattern_count()
        )));
    }
    if basis.ordering_name() != coeffs.ordering_name() {
        return Err(Error::BasisMismatch(format!(
            "basis ordering '{}', coefficients were acquired under '{}'",
            basis.ordering_name(),
            coeffs.ordering_name()
        )));
    }
    Ok(())
}

/// Adjoint applied to however many ordered coefficient rows are present;
/// missing rows contribute nothing (zero-fill).
fn invert_prefix(basis: &HadamardBasis, coeffs: &CoefficientSet) -> DataCube {
    let pattern_count = basis.pattern_count();
    let nt = coeffs.grid().nt();
    let m = coeffs.m();
    let scale = 1.0 / pattern_count as f64;

    let rows: Vec<Vec<f64>> = (0..pattern_count)
        .into_par_iter()
        .map(|pixel| {
            let mut acc = vec![0.0; nt];
            for i in 0..m {
                let row = coeffs.coeffs().row(i);
                if basis.entry(i, pixel) > 0 {
                    for (a, &c) in acc.iter_mut().zip(row) {
                        *a += c;
                    }
                } else {
                    for (a, &c) in acc.iter_mut().zip(row) {
                        *a -= c;
                    }
                }
            }
            for a in &mut acc {
                *a *= scale;
            }
            acc
        })
        .collect();

    let mut fields = Array2::zeros((pattern_count, nt));
    for (mut row, data) in fields.outer_iter_mut().zip(rows) {
        row.assign(&ndarray::ArrayView1::from(&data));
    }
    DataCube::new(basis.n(), coeffs.grid(), fields)
        .expect("adjoint of finite coefficients is finite")
}

/// Exact inversion `S = (1/N)·Hᵀ·coeffs` from a complete coefficient set.
pub fn invert_full(basis: &HadamardBasis, coeffs: &CoefficientSet) -> Result<DataCube> {
    check_basis(basis, coeffs)?;
    if coeffs.m() != basis.pattern_count() {
        return Err(Error::NotFullRank {
            m: coeffs.m(),
            n: basis.pattern_count(),
        });
    }
    Ok(invert_prefix(basis, coeffs))
}

/// Truncated orthogonal reconstruction from m < N ordered coefficients:
/// zero-fill the rest, then apply the same adjoint as [`invert_full`].
pub fn invert_compressive(basis: &HadamardBasis, coeffs: &CoefficientSet) -> Result<DataCube> {
    check_basis(basis, coeffs)?;
    if coeffs.m() >= basis.pattern_count() {
        return Err(Error::NotCompressive {
            m: coeffs.m(),
            n: basis.pattern_count(),
        });
    }
    Ok(invert_prefix(basis, coeffs))
}

/// Dispatch to [`invert_full`] when all N coefficients are present, else to
/// [`invert_compressive`].
pub fn invert(basis: &HadamardBasis, coeffs: &CoefficientSet) -> Result<DataCube> {
    if coeffs.m() == basis.pattern_count() {
        invert_full(basis, coeffs)
    } else {
        invert_compressive(basis, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{order_sequency2d, sylvester_hadamard, BinaryMaskSet};
    use crate::simulator::{measure, NoiseModel};
    use ndarray::s;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_grid() -> TimeGrid {
        TimeGrid::new(0.0, 0.05, 64).unwrap()
    }

    fn random_cube(n: usize, grid: TimeGrid, seed: u64) -> DataCube {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields = Array2::from_shape_fn((n * n, grid.nt()), |_| rng.random_range(-1.0..1.0));
        DataCube::new(n, grid, fields).unwrap()
    }

    fn uniform_cube(n: usize, grid: TimeGrid, value: f64) -> DataCube {
        DataCube::new(n, grid, Array2::from_elem((n * n, grid.nt()), value)).unwrap()
    }

    fn frobenius(x: &Array2<f64>) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn debias_specialises_at_full_depth() {
        let cube = random_cube(2, small_grid(), 1);
        let basis = sylvester_hadamard(2).unwrap();
        let masks = BinaryMaskSet::new(&basis, 1.0).unwrap();
        let meas = measure(&cube, &masks, 4, NoiseModel::noiseless()).unwrap();
        let coeffs = debias(&meas).unwrap();
        assert_eq!(coeffs.coeffs().row(0), meas.records().row(0));
        for i in 1..4 {
            for (c, (&r, &r0)) in coeffs
                .coeffs()
                .row(i)
                .iter()
                .zip(meas.records().row(i).iter().zip(meas.records().row(0)))
            {
                assert!((c - (2.0 * r - r0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn debias_recovers_signed_coefficients_for_a_delta_scene() {
        let grid = small_grid();
        let n = 2;
        let bright = 3;
        let mut fields = Array2::zeros((n * n, grid.nt()));
        for t in 0..grid.nt() {
            fields[[bright, t]] = (t as f64 * 0.3).sin();
        }
        let cube = DataCube::new(n, grid, fields).unwrap();
        let basis = sylvester_hadamard(2).unwrap();
        let masks = BinaryMaskSet::new(&basis, 1.0).unwrap();
        let meas = measure(&cube, &masks, 4, NoiseModel::noiseless()).unwrap();
        let coeffs = debias(&meas).unwrap();
        for i in 0..4 {
            let sign = basis.entry(i, bright) as f64;
            for (c, &s) in coeffs.coeffs().row(i).iter().zip(cube.fields().row(bright)) {
                assert!((c - sign * s).abs() < 1e-12, "pattern {i}");
            }
        }
    }

    #[test]
    fn debias_rejects_zero_depth() {
        let cube = uniform_cube(2, small_grid(), 1.0);
        let basis = sylvester_hadamard(2).unwrap();
        let masks = BinaryMaskSet::new(&basis, 1.0).unwrap();
        let meas = measure(&cube, &masks, 4, NoiseModel::noiseless()).unwrap();
        let broken = MeasurementSet::new(
            4,
            meas.ordering_name(),
            0.0,
            meas.grid(),
            meas.records().clone(),
            meas.noise(),
        )
        .unwrap();
        assert!(matches!(debias(&broken), Err(Error::ZeroModulationDepth)));
    }

    #[test]
    fn round_trip_across_modulation_depths() {
        let grid = small_grid();
        for &mu in &[1.0, 0.95, 0.5] {
            for log2_n in [2u32, 4] {
                let n = 1usize << (log2_n / 2);
                let cube = random_cube(n, grid, 100 + log2_n as u64);
                let basis = order_sequency2d(&sylvester_hadamard(log2_n).unwrap());
                let masks = BinaryMaskSet::new(&basis, mu).unwrap();
                let meas =
                    measure(&cube, &masks, basis.pattern_count(), NoiseModel::noiseless())
                        .unwrap();
                let recovered = invert_full(&basis, &debias(&meas).unwrap()).unwrap();
                let err = frobenius(&(recovered.fields() - cube.fields()))
                    / frobenius(cube.fields());
                assert!(err < 1e-9, "relative error {err} at mu = {mu}");
            }
        }
    }

    #[test]
    fn full_inversion_requires_all_coefficients() {
        let grid = small_grid();
        let basis = sylvester_hadamard(2).unwrap();
        let coeffs =
            CoefficientSet::new(4, "natural", grid, Array2::zeros((3, grid.nt()))).unwrap();
        assert!(matches!(
            invert_full(&basis, &coeffs),
            Err(Error::NotFullRank { m: 3, n: 4 })
        ));
    }

    #[test]
    fn compressive_inversion_requires_a_strict_prefix() {
        let grid = small_grid();
        let basis = sylvester_hadamard(2).unwrap();
        let coeffs =
            CoefficientSet::new(4, "natural", grid, Array2::zeros((4, grid.nt()))).unwrap();
        assert!(matches!(
            invert_compressive(&basis, &coeffs),
            Err(Error::NotCompressive { m: 4, n: 4 })
        ));
    }

    #[test]
    fn basis_metadata_must_match() {
        let grid = small_grid();
        let coeffs =
            CoefficientSet::new(4, "natural", grid, Array2::zeros((4, grid.nt()))).unwrap();
        let wrong_size = sylvester_hadamard(4).unwrap();
        assert!(matches!(
            invert_full(&wrong_size, &coeffs),
            Err(Error::BasisMismatch(_))
        ));
        let wrong_order = order_sequency2d(&sylvester_hadamard(2).unwrap());
        assert!(matches!(
            invert_full(&wrong_order, &coeffs),
            Err(Error::BasisMismatch(_))
        ));
    }

    #[test]
    fn compressive_equals_full_with_zeroed_tail() {
        let grid = small_grid();
        let cube = random_cube(4, grid, 9);
        let basis = order_sequency2d(&sylvester_hadamard(4).unwrap());
        let masks = BinaryMaskSet::new(&basis, 0.95).unwrap();
        let meas = measure(&cube, &masks, 16, NoiseModel::noiseless()).unwrap();
        let full = debias(&meas).unwrap();

        let m = 7;
        let truncated = full.truncate(m).unwrap();
        let compressive = invert_compressive(&basis, &truncated).unwrap();

        let mut zeroed = full.coeffs().clone();
        zeroed.slice_mut(s![m.., ..]).fill(0.0);
        let padded = CoefficientSet::new(16, basis.ordering_name(), grid, zeroed).unwrap();
        let reference = invert_full(&basis, &padded).unwrap();

        assert_eq!(compressive.fields(), reference.fields());
    }

    #[test]
    fn uniform_cube_recovered_from_one_coefficient() {
        let grid = small_grid();
        let cube = uniform_cube(4, grid, 0.37);
        let basis = order_sequency2d(&sylvester_hadamard(4).unwrap());
        let masks = BinaryMaskSet::new(&basis, 0.95).unwrap();
        let meas = measure(&cube, &masks, 16, NoiseModel::noiseless()).unwrap();
        let coeffs = debias(&meas).unwrap().truncate(1).unwrap();
        let recovered = invert_compressive(&basis, &coeffs).unwrap();
        let err =
            frobenius(&(recovered.fields() - cube.fields())) / frobenius(cube.fields());
        assert!(err < 1e-12, "relative error {err}");
    }

    #[test]
    fn dropping_an_identically_zero_coefficient_changes_nothing() {
        let grid = small_grid();
        let cube = uniform_cube(2, grid, 1.5);
        let basis = order_sequency2d(&sylvester_hadamard(2).unwrap());
        let masks = BinaryMaskSet::new(&basis, 1.0).unwrap();
        let meas = measure(&cube, &masks, 4, NoiseModel::noiseless()).unwrap();
        let full = debias(&meas).unwrap();
        let all = invert_full(&basis, &full).unwrap();
        let drop_last = invert_compressive(&basis, &full.truncate(3).unwrap()).unwrap();
        let diff = frobenius(&(all.fields() - drop_last.fields()));
        assert!(diff < 1e-12 * frobenius(all.fields()));
    }

    #[test]
    fn all_zero_coefficients_invert_to_zero() {
        let grid = small_grid();
        let basis = sylvester_hadamard(2).unwrap();
        let coeffs =
            CoefficientSet::new(4, "natural", grid, Array2::zeros((4, grid.nt()))).unwrap();
        let cube = invert_full(&basis, &coeffs).unwrap();
        assert!(cube.fields().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn inversion_commutes_with_time_permutation() {
        let grid = small_grid();
        let cube = random_cube(2, grid, 55);
        let basis = sylvester_hadamard(2).unwrap();
        let masks = BinaryMaskSet::new(&basis, 0.95).unwrap();
        let meas = measure(&cube, &masks, 4, NoiseModel::noiseless()).unwrap();
        let coeffs = debias(&meas).unwrap();

        let nt = grid.nt();
        let reversed = Array2::from_shape_fn((4, nt), |(i, t)| coeffs.coeffs()[[i, nt - 1 - t]]);
        let rev_set = CoefficientSet::new(4, "natural", grid, reversed).unwrap();

        let direct = invert_full(&basis, &coeffs).unwrap();
        let via_reverse = invert_full(&basis, &rev_set).unwrap();
        for p in 0..4 {
            for t in 0..nt {
                assert_eq!(
                    direct.fields()[[p, t]],
                    via_reverse.fields()[[p, nt - 1 - t]]
                );
            }
        }
    }
}
