//! Imaging products derived from a reconstructed data cube: time-of-flight
//! delay and thickness maps, per-pixel spectra, spectral transmission
//! images, and the peak-sampled RMS reconstruction error.

use crate::error::{Error, Result};
use crate::fft::RealFft;
use crate::simulator::{DataCube, TimeGrid, Waveform};
use crate::C_MM_PER_PS;
use ndarray::Array2;
use rayon::prelude::*;

/// Pixels whose peak amplitude falls below this fraction of the reference
/// peak carry no reliable delay and are flagged invalid.
pub const DEFAULT_INVALID_THRESHOLD: f64 = 0.05;
/// Spectral images average this many DFT bins (≈ 58 GHz at the default
/// grid) to damp leakage.
pub const DEFAULT_AVG_BINS: usize = 3;

/// Per-pixel pulse delay in ps relative to a reference waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayImage {
    n: usize,
    values: Array2<f64>,
    valid: Array2<bool>,
}

impl DelayImage {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Delays in ps; invalid pixels hold 0.
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn valid(&self) -> &Array2<bool> {
        &self.valid
    }
}

/// Per-pixel material thickness in mm, derived from a delay image.
#[derive(Debug, Clone, PartialEq)]
pub struct ThicknessImage {
    n: usize,
    values: Array2<f64>,
    valid: Array2<bool>,
    n_r: f64,
}

impl ThicknessImage {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Thicknesses in mm; invalid pixels hold 0.
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn valid(&self) -> &Array2<bool> {
        &self.valid
    }

    /// Refractive index used for the conversion.
    pub fn n_r(&self) -> f64 {
        self.n_r
    }
}

/// One-sided amplitude/phase spectrum on uniform DFT bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    freqs_thz: Vec<f64>,
    amplitude: Vec<f64>,
    phase: Vec<f64>,
}

impl Spectrum {
    /// Bin frequencies, 0 through Nyquist, spaced 1/(nt·dt).
    pub fn freqs_thz(&self) -> &[f64] {
        &self.freqs_thz
    }

    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }
}

/// Per-pixel amplitude transmission around one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionImage {
    n: usize,
    f0_thz: f64,
    values: Array2<f64>,
}

impl TransmissionImage {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f0_thz(&self) -> f64 {
        self.f0_thz
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Index of the largest |value|; the last one wins on exact ties.
fn argmax_abs(field: &[f64]) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, &v) in field.iter().enumerate() {
        if v.abs() >= best_value {
            best_value = v.abs();
            best = i;
        }
    }
    best
}

/// Vertex offset in samples of the parabola through (−1, y0), (0, y1),
/// (1, y2), clamped to half a sample.
fn parabolic_delta(y0: f64, y1: f64, y2: f64) -> f64 {
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 {
        return 0.0;
    }
    ((y0 - y2) / (2.0 * denom)).clamp(-0.5, 0.5)
}

/// Time of the maximum of |field|, refined by 3-point parabolic
/// interpolation around the discrete argmax. Returns the unrefined grid
/// time when the argmax sits on a grid edge, and `None` for an all-zero
/// waveform.
///
/// Suited to single-peaked waveforms. Anti-symmetric single-cycle pulses
/// have two equal-magnitude lobes of opposite sign, and |field| cannot say
/// which lobe two different waveforms agree on; [`delay_map`] handles that
/// case by matching lobe polarity against its reference.
pub fn peak_time(w: &Waveform) -> Option<f64> {
    let field = w.field();
    if field.iter().all(|&v| v == 0.0) {
        return None;
    }
    let k = argmax_abs(field);
    let grid = w.grid();
    if k == 0 || k == field.len() - 1 {
        return Some(grid.time(k));
    }
    let delta = parabolic_delta(field[k - 1].abs(), field[k].abs(), field[k + 1].abs());
    Some(grid.time(k) + delta * grid.dt())
}

/// Refined time of the maximum of `sign·field`, or `None` when that signal
/// never rises above zero.
fn polarity_peak_time(field: &[f64], grid: TimeGrid, sign: f64) -> Option<f64> {
    let mut k = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &v) in field.iter().enumerate() {
        let g = sign * v;
        if g >= best {
            best = g;
            k = i;
        }
    }
    if best <= 0.0 {
        return None;
    }
    if k == 0 || k == field.len() - 1 {
        return Some(grid.time(k));
    }
    let delta = parabolic_delta(
        sign * field[k - 1],
        sign * field[k],
        sign * field[k + 1],
    );
    Some(grid.time(k) + delta * grid.dt())
}

/// Per-pixel peak delay relative to a reference waveform (the simulated
/// free-space path).
///
/// Pixels whose peak |field| falls below `invalid_threshold` times the
/// reference peak are flagged invalid, as are pixels whose polarity never
/// matches the reference.
///
/// Timing matches lobe polarity: the reference's strongest lobe fixes a
/// sign, and every pixel is timed at the maximum of `sign·field`. A
/// zero-mean single-cycle pulse has leading and trailing lobes of equal
/// |amplitude|, so a plain |field| argmax can land on either lobe from one
/// pixel to the next, shifting that pixel's delay by the lobe spacing;
/// fixing the polarity times the same lobe everywhere.
pub fn delay_map(
    cube: &DataCube,
    reference: &Waveform,
    invalid_threshold: f64,
) -> Result<DelayImage> {
    if cube.grid() != reference.grid() {
        return Err(Error::DimensionMismatch(
            "cube and reference are on different time grids".to_owned(),
        ));
    }
    let ref_peak = reference.peak_abs();
    if ref_peak == 0.0 {
        return Err(Error::ZeroReference);
    }
    let grid = cube.grid();
    let k_ref = argmax_abs(reference.field());
    let sign = if reference.field()[k_ref] < 0.0 {
        -1.0
    } else {
        1.0
    };
    let t_ref = polarity_peak_time(reference.field(), grid, sign)
        .expect("the reference peaks under its own polarity");

    let delays: Vec<Option<f64>> = (0..cube.pixel_count())
        .into_par_iter()
        .map(|pixel| {
            let row = cube.fields().row(pixel);
            let field = row.to_slice().expect("cube rows are contiguous");
            let peak = field.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if peak < invalid_threshold * ref_peak {
                return None;
            }
            polarity_peak_time(field, grid, sign).map(|t| t - t_ref)
        })
        .collect();

    let n = cube.n();
    let mut values = Array2::zeros((n, n));
    let mut valid = Array2::from_elem((n, n), false);
    for (pixel, delay) in delays.into_iter().enumerate() {
        if let Some(d) = delay {
            values[[pixel / n, pixel % n]] = d;
            valid[[pixel / n, pixel % n]] = true;
        }
    }
    Ok(DelayImage { n, values, valid })
}

/// Convert delays to material thickness: `d = c·Δt/(n_r − 1)`.
///
/// Negative delays clamp to 0 mm and flag the pixel invalid. `n_r` must
/// exceed 1 or the conversion diverges.
pub fn thickness_map(delays: &DelayImage, n_r: f64) -> Result<ThicknessImage> {
    if !(n_r > 1.0 && n_r.is_finite()) {
        return Err(Error::InvalidRefractiveIndex(n_r));
    }
    let scale = C_MM_PER_PS / (n_r - 1.0);
    let n = delays.n();
    let mut values = Array2::zeros((n, n));
    let mut valid = Array2::from_elem((n, n), false);
    for r in 0..n {
        for c in 0..n {
            if !delays.valid[[r, c]] {
                continue;
            }
            let dt = delays.values[[r, c]];
            if dt < 0.0 {
                continue;
            }
            values[[r, c]] = scale * dt;
            valid[[r, c]] = true;
        }
    }
    Ok(ThicknessImage {
        n,
        values,
        valid,
        n_r,
    })
}

/// One-sided DFT of the waveform: rectangular window, bins 0..=nt/2,
/// amplitude = |DFT| and phase = arg(DFT).
pub fn spectrum(w: &Waveform) -> Spectrum {
    let grid = w.grid();
    let fft = RealFft::new(grid.nt());
    let bins = fft.forward(w.field());
    Spectrum {
        freqs_thz: grid.one_sided_freqs_thz(),
        amplitude: bins.iter().map(|c| c.norm()).collect(),
        phase: bins.iter().map(|c| c.arg()).collect(),
    }
}

/// Indices of the `count` one-sided bins nearest `f0`, ties to the lower
/// bin.
fn nearest_bins(grid: TimeGrid, f0_thz: f64, count: usize) -> Vec<usize> {
    let df = grid.freq_step_thz();
    let mut indices: Vec<usize> = (0..=grid.nt() / 2).collect();
    indices.sort_by(|&a, &b| {
        let da = (a as f64 * df - f0_thz).abs();
        let db = (b as f64 * df - f0_thz).abs();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    indices.truncate(count.min(grid.nt() / 2 + 1));
    indices
}

/// Per-pixel amplitude transmission: the mean, over the `avg_bins` DFT bins
/// nearest `f0_thz`, of pixel amplitude divided by reference amplitude.
///
/// Errors if `f0_thz` lies beyond Nyquist or the reference spectrum is
/// below 1e−9 of its own maximum at any selected bin.
pub fn spectral_image(
    cube: &DataCube,
    reference: &Waveform,
    f0_thz: f64,
    avg_bins: usize,
) -> Result<TransmissionImage> {
    if cube.grid() != reference.grid() {
        return Err(Error::DimensionMismatch(
            "cube and reference are on different time grids".to_owned(),
        ));
    }
    let grid = cube.grid();
    if f0_thz.is_nan() || f0_thz < 0.0 || f0_thz > grid.nyquist_thz() {
        return Err(Error::BeyondNyquist {
            f0_thz,
            nyquist_thz: grid.nyquist_thz(),
        });
    }
    if avg_bins < 1 {
        return Err(Error::DimensionMismatch(
            "avg_bins must be at least 1".to_owned(),
        ));
    }

    let fft = RealFft::new(grid.nt());
    let ref_amplitude: Vec<f64> = fft
        .forward(reference.field())
        .iter()
        .map(|c| c.norm())
        .collect();
    let ref_max = ref_amplitude.iter().fold(0.0f64, |a, &v| a.max(v));
    if ref_max == 0.0 {
        return Err(Error::ZeroReference);
    }
    let bins = nearest_bins(grid, f0_thz, avg_bins);
    if bins.iter().any(|&b| ref_amplitude[b] < 1e-9 * ref_max) {
        return Err(Error::SpectralNull(f0_thz));
    }

    let ratios: Vec<f64> = (0..cube.pixel_count())
        .into_par_iter()
        .map(|pixel| {
            let row = cube.fields().row(pixel);
            let field = row.to_slice().expect("cube rows are contiguous");
            let amplitude = fft.forward(field);
            bins.iter()
                .map(|&b| amplitude[b].norm() / ref_amplitude[b])
                .sum::<f64>()
                / bins.len() as f64
        })
        .collect();

    let n = cube.n();
    let values = Array2::from_shape_fn((n, n), |(r, c)| ratios[r * n + c]);
    Ok(TransmissionImage {
        n,
        f0_thz,
        values,
    })
}

/// RMS of the test−reference field difference sampled at each pixel's
/// reference peak, normalized to the brightest reference peak:
/// `sqrt(mean_p (test_p(t*_p) − ref_p(t*_p))²) / max_p |ref_p(t*_p)|` with
/// `t*_p` the discrete argmax of |ref_p|.
pub fn rms_error_at_peak(test: &DataCube, reference: &DataCube) -> Result<f64> {
    if test.n() != reference.n() || test.grid() != reference.grid() {
        return Err(Error::DimensionMismatch(format!(
            "test cube ({} pixels) and reference cube ({} pixels) differ in shape or grid",
            test.pixel_count(),
            reference.pixel_count()
        )));
    }
    let mut sum_sq = 0.0;
    let mut max_peak = 0.0f64;
    for pixel in 0..reference.pixel_count() {
        let ref_row = reference.fields().row(pixel);
        let k = argmax_abs(ref_row.to_slice().expect("cube rows are contiguous"));
        let e = test.fields()[[pixel, k]] - ref_row[k];
        sum_sq += e * e;
        max_peak = max_peak.max(ref_row[k].abs());
    }
    if max_peak == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((sum_sq / reference.pixel_count() as f64).sqrt() / max_peak)
}
