//! One-sided real FFT helpers on top of `rustfft`.
//!
//! Waveforms are real, so the toolkit works with one-sided spectra
//! (`nt/2 + 1` bins from DC to Nyquist) and reconstructs the negative
//! frequencies by conjugate symmetry on the way back.

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Forward/inverse transform pair for real signals of a fixed length.
pub(crate) struct RealFft {
    nt: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl RealFft {
    /// `nt` must be even (time grids enforce a power of two).
    pub(crate) fn new(nt: usize) -> Self {
        debug_assert!(nt >= 2 && nt.is_multiple_of(2));
        let mut planner = FftPlanner::new();
        Self {
            nt,
            forward: planner.plan_fft_forward(nt),
            inverse: planner.plan_fft_inverse(nt),
        }
    }

    /// One-sided spectrum of a real signal: bins 0..=nt/2, unnormalised.
    pub(crate) fn forward(&self, field: &[f64]) -> Vec<Complex<f64>> {
        assert_eq!(field.len(), self.nt);
        let mut buf: Vec<Complex<f64>> =
            field.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        buf.truncate(self.nt / 2 + 1);
        buf
    }

    /// Real signal from a one-sided spectrum, extending by conjugate
    /// symmetry. The DC and Nyquist bins take their real parts, which is the
    /// only extension consistent with a real output.
    pub(crate) fn inverse(&self, one_sided: &[Complex<f64>]) -> Vec<f64> {
        let nt = self.nt;
        assert_eq!(one_sided.len(), nt / 2 + 1);
        let mut buf = vec![Complex::new(0.0, 0.0); nt];
        buf[0] = Complex::new(one_sided[0].re, 0.0);
        for k in 1..nt / 2 {
            buf[k] = one_sided[k];
            buf[nt - k] = one_sided[k].conj();
        }
        buf[nt / 2] = Complex::new(one_sided[nt / 2].re, 0.0);
        self.inverse.process(&mut buf);
        let scale = 1.0 / nt as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}
