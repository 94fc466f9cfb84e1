//! Pulse synthesis, ground-truth data cubes, and single-pixel detector
//! records.
//!
//! The forward model: a single-cycle THz pulse passes through every scene
//! pixel (frequency-domain transfer, [`ideal_cube`]), a spatial modulator
//! imposes one amplitude mask per acquisition, and a detector with no
//! spatial resolution records the plain sum of the masked per-pixel fields
//! as one waveform per mask ([`measure`]), optionally with per-pattern gain
//! jitter and per-sample additive noise.

use crate::error::{Error, Result};
use crate::fft::RealFft;
use crate::patterns::BinaryMaskSet;
use crate::scene::{pixel_transfer_function, Scene};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Default sampling step in ps. 10 THz Nyquist, ample for a 0.3 ps pulse.
pub const DEFAULT_DT_PS: f64 = 0.05;
/// Default sample count: a 51.2 ps window at [`DEFAULT_DT_PS`], giving
/// 19.5 GHz frequency resolution.
pub const DEFAULT_NT: usize = 1024;
/// Default pulse center in ps.
pub const DEFAULT_PULSE_CENTER_PS: f64 = 10.0;
/// Default pulse width τ in ps; spectrum peaks near 0.53 THz and stays
/// usable to ~2.5 THz.
pub const DEFAULT_PULSE_WIDTH_PS: f64 = 0.3;
/// Default additive noise, as a fraction of the all-open record peak.
pub const DEFAULT_ADDITIVE_SIGMA: f64 = 0.005;

/// Uniform time axis: `t_k = t0 + k·dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    nt: usize,
}

impl TimeGrid {
    /// `dt` must be positive and `nt` a power of two (and ≥ 2) so spectra
    /// come from plain power-of-two transforms.
    pub fn new(t0: f64, dt: f64, nt: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return Err(Error::InvalidTimeGrid(format!(
                "need finite t0 and dt > 0, got t0 = {t0}, dt = {dt}"
            )));
        }
        if nt < 2 || !nt.is_power_of_two() {
            return Err(Error::InvalidTimeGrid(format!(
                "nt must be a power of 2 and at least 2, got {nt}"
            )));
        }
        Ok(Self { t0, dt, nt })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Time of sample `k` in ps.
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Time of the last sample in ps.
    pub fn t_end(&self) -> f64 {
        self.time(self.nt - 1)
    }

    /// Spacing of DFT bins in THz: 1/(nt·dt).
    pub fn freq_step_thz(&self) -> f64 {
        1.0 / (self.nt as f64 * self.dt)
    }

    /// Highest representable frequency in THz: 1/(2·dt).
    pub fn nyquist_thz(&self) -> f64 {
        0.5 / self.dt
    }

    /// One-sided DFT bin frequencies, 0 through Nyquist (nt/2 + 1 values).
    pub fn one_sided_freqs_thz(&self) -> Vec<f64> {
        let df = self.freq_step_thz();
        (0..=self.nt / 2).map(|k| k as f64 * df).collect()
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t0: 0.0,
            dt: DEFAULT_DT_PS,
            nt: DEFAULT_NT,
        }
    }
}

/// One real electric-field trace on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    grid: TimeGrid,
    field: Vec<f64>,
}

impl Waveform {
    pub fn new(grid: TimeGrid, field: Vec<f64>) -> Result<Self> {
        if field.len() != grid.nt() {
            return Err(Error::DimensionMismatch(format!(
                "waveform holds {} samples, grid expects {}",
                field.len(),
                grid.nt()
            )));
        }
        if !field.iter().all(|v| v.is_finite()) {
            return Err(Error::DimensionMismatch(
                "waveform contains non-finite samples".to_owned(),
            ));
        }
        Ok(Self { grid, field })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    /// Largest absolute sample value.
    pub fn peak_abs(&self) -> f64 {
        self.field.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Per-pixel waveforms: an (N = n²) × nt matrix, row-major pixel order,
/// time fastest-varying.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCube {
    n: usize,
    grid: TimeGrid,
    fields: Array2<f64>,
}

impl DataCube {
    pub fn new(n: usize, grid: TimeGrid, fields: Array2<f64>) -> Result<Self> {
        if fields.dim() != (n * n, grid.nt()) {
            return Err(Error::DimensionMismatch(format!(
                "cube fields have shape {:?}, expected ({}, {})",
                fields.dim(),
                n * n,
                grid.nt()
            )));
        }
        if !fields.iter().all(|v| v.is_finite()) {
            return Err(Error::DimensionMismatch(
                "cube contains non-finite samples".to_owned(),
            ));
        }
        Ok(Self { n, grid, fields })
    }

    /// Side length of the pixel grid.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Pixel count N = n².
    pub fn pixel_count(&self) -> usize {
        self.n * self.n
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn fields(&self) -> &Array2<f64> {
        &self.fields
    }

    /// Waveform of the pixel at a flattened row-major index.
    pub fn pixel_waveform(&self, pixel: usize) -> Waveform {
        Waveform {
            grid: self.grid,
            field: self.fields.row(pixel).to_vec(),
        }
    }
}

/// Additive + multiplicative detector noise, generated from an explicit
/// seed.
///
/// `additive_sigma` scales with the peak of the clean all-open record;
/// `multiplicative_sigma` is a per-pattern relative gain jitter. The same
/// seed always produces the same draws, and the first m records of a run
/// are independent of how many further records follow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub additive_sigma: f64,
    pub multiplicative_sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(additive_sigma: f64, multiplicative_sigma: f64, seed: u64) -> Result<Self> {
        if !(additive_sigma >= 0.0 && multiplicative_sigma >= 0.0) {
            return Err(Error::DimensionMismatch(format!(
                "noise sigmas must be ≥ 0, got additive {additive_sigma}, \
                 multiplicative {multiplicative_sigma}"
            )));
        }
        Ok(Self {
            additive_sigma,
            multiplicative_sigma,
            seed,
        })
    }

    pub fn noiseless() -> Self {
        Self {
            additive_sigma: 0.0,
            multiplicative_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.additive_sigma == 0.0 && self.multiplicative_sigma == 0.0
    }
}

/// Detector records for the first m ordered patterns, plus the metadata
/// needed to invert them.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pattern_count: usize,
    ordering_name: String,
    modulation_depth: f64,
    grid: TimeGrid,
    records: Array2<f64>,
    noise: NoiseModel,
}

impl MeasurementSet {
    pub fn new(
        pattern_count: usize,
        ordering_name: impl Into<String>,
        modulation_depth: f64,
        grid: TimeGrid,
        records: Array2<f64>,
        noise: NoiseModel,
    ) -> Result<Self> {
        let m = records.nrows();
        if m < 1 || m > pattern_count {
            return Err(Error::MeasurementCountOutOfRange {
                m,
                max: pattern_count,
            });
        }
        if records.ncols() != grid.nt() {
            return Err(Error::DimensionMismatch(format!(
                "records have {} time samples, grid expects {}",
                records.ncols(),
                grid.nt()
            )));
        }
        Ok(Self {
            pattern_count,
            ordering_name: ordering_name.into(),
            modulation_depth,
            grid,
            records,
            noise,
        })
    }

    /// Full pattern count N of the basis the records were taken in.
    pub fn pattern_count(&self) -> usize {
        self.pattern_count
    }

    pub fn ordering_name(&self) -> &str {
        &self.ordering_name
    }

    pub fn modulation_depth(&self) -> f64 {
        self.modulation_depth
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// Number of recorded patterns m.
    pub fn m(&self) -> usize {
        self.records.nrows()
    }

    /// m × nt record matrix, acquisition order.
    pub fn records(&self) -> &Array2<f64> {
        &self.records
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }
}

/// Gaussian-derivative single-cycle pulse
/// `E(t) = −A·(t−t₀)/τ · exp(−(t−t₀)²/(2τ²))`.
///
/// Zero mean by construction; |E| peaks at t₀ ± τ with value A·e^(−1/2).
/// Errors if the grid clips the pulse, i.e. the boundary amplitude exceeds
/// 1e−6 of the peak.
pub fn synthesize_pulse(
    grid: TimeGrid,
    center_time_ps: f64,
    width_ps: f64,
    amplitude: f64,
) -> Result<Waveform> {
    if !(width_ps > 0.0 && width_ps.is_finite()) {
        return Err(Error::InvalidPulseWidth(width_ps));
    }
    let envelope = |t: f64| {
        let u = (t - center_time_ps) / width_ps;
        -amplitude * u * (-0.5 * u * u).exp()
    };
    let peak = amplitude.abs() * (-0.5f64).exp();
    let clipped = |t: f64| envelope(t).abs() > 1e-6 * peak;
    if center_time_ps < grid.t0()
        || center_time_ps > grid.t_end()
        || clipped(grid.t0())
        || clipped(grid.t_end())
    {
        return Err(Error::PulseClipped {
            center_ps: center_time_ps,
        });
    }
    let field = (0..grid.nt()).map(|k| envelope(grid.time(k))).collect();
    Waveform::new(grid, field)
}

/// Noise-free data cube: the pulse propagated through every scene pixel.
///
/// Per pixel: transform the pulse, multiply by the column transfer function
/// at the grid's one-sided frequencies, transform back with conjugate
/// symmetry so the field stays real. Free-space pixels reproduce the pulse
/// exactly.
pub fn ideal_cube(scene: &Scene, pulse: &Waveform) -> DataCube {
    let grid = pulse.grid();
    let nt = grid.nt();
    let fft = RealFft::new(nt);
    let spectrum = fft.forward(pulse.field());
    let freqs = grid.one_sided_freqs_thz();

    let rows: Vec<Vec<f64>> = scene
        .columns()
        .par_iter()
        .map(|column| {
            let transfer = pixel_transfer_function(column, &freqs);
            let filtered: Vec<_> = spectrum
                .iter()
                .zip(&transfer)
                .map(|(s, t)| s * t)
                .collect();
            fft.inverse(&filtered)
        })
        .collect();

    let mut fields = Array2::zeros((scene.pixel_count(), nt));
    for (mut row, data) in fields.outer_iter_mut().zip(rows) {
        row.assign(&ndarray::ArrayView1::from(&data));
    }
    DataCube {
        n: scene.n(),
        grid,
        fields,
    }
}

/// Detector records for the first m masks:
/// `record_i(t) = g_i · Σ_p mask_i(p)·cube(p,t) + ε_i(t)`, with
/// `g_i ~ Normal(1, multiplicative_sigma²)` per pattern and
/// `ε ~ Normal(0, (additive_sigma·peak₀)²)` per sample, where peak₀ is the
/// clean all-open record's peak amplitude.
///
/// The underlying standard-normal draws depend only on the seed, not on the
/// sigmas, so a noiseless run is the zero-sigma limit of a noisy one.
pub fn measure(
    cube: &DataCube,
    masks: &BinaryMaskSet,
    m: usize,
    noise: NoiseModel,
) -> Result<MeasurementSet> {
    let basis = masks.basis();
    let pattern_count = basis.pattern_count();
    if pattern_count != cube.pixel_count() {
        return Err(Error::DimensionMismatch(format!(
            "mask set covers {} pixels, cube has {}",
            pattern_count,
            cube.pixel_count()
        )));
    }
    if m < 1 || m > pattern_count {
        return Err(Error::MeasurementCountOutOfRange {
            m,
            max: pattern_count,
        });
    }
    if !basis.row(0).iter().all(|&v| v == 1) {
        return Err(Error::BasisMismatch(
            "ordered pattern 0 must be the all-open pattern".to_owned(),
        ));
    }

    let nt = cube.grid().nt();
    let clean: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mask = masks.mask(i);
            let mut acc = vec![0.0; nt];
            for pixel in 0..pattern_count {
                let a = mask.amplitude(pixel);
                if a == 0.0 {
                    continue;
                }
                for (sum, &s) in acc.iter_mut().zip(cube.fields().row(pixel)) {
                    *sum += a * s;
                }
            }
            acc
        })
        .collect();

    let peak0 = clean[0].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let additive = noise.additive_sigma * peak0;

    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut records = Array2::zeros((m, nt));
    for (i, row) in clean.into_iter().enumerate() {
        let z: f64 = rng.sample(StandardNormal);
        let gain = 1.0 + noise.multiplicative_sigma * z;
        for (t, value) in row.into_iter().enumerate() {
            let eps: f64 = rng.sample(StandardNormal);
            records[[i, t]] = gain * value + additive * eps;
        }
    }

    MeasurementSet::new(
        pattern_count,
        basis.ordering_name(),
        masks.modulation_depth(),
        cube.grid(),
        records,
        noise,
    )
}
