//! Simulation and reconstruction toolkit for time-domain terahertz
//! single-pixel imaging.
//!
//! A single-pixel THz time-domain system illuminates a scene with a sequence
//! of spatial patterns and records, for every pattern, one electric-field
//! waveform on a detector with no spatial resolution. Stacking the patterns
//! as rows of an orthogonal ±1 matrix `H` turns acquisition into the linear
//! model `W(t) = H · S(t)`, where `S(t)` holds the per-pixel waveforms.
//! Inverting that system — fully, or from a truncated prefix of a
//! spatial-frequency-ordered pattern set — recovers a data cube with two
//! spatial dimensions and one time dimension, from which time-of-flight
//! thickness maps and hyperspectral transmission images follow.
//!
//! The crate is organised along that pipeline:
//!
//! - [`patterns`]: Sylvester–Hadamard basis construction, pattern ordering
//!   strategies, and the binary amplitude masks a physical modulator realises.
//! - [`scene`]: layered dielectric scenes and their per-pixel complex
//!   frequency-domain transfer functions.
//! - [`simulator`]: THz pulse synthesis, ground-truth data cubes, and noisy
//!   single-pixel detector records.
//! - [`recon`]: debiasing of binary-mask records into Hadamard coefficients
//!   and full or compressive linear inversion.
//! - [`analysis`]: peak timing, delay/thickness maps, spectra, spectral
//!   transmission images, and the peak-sampled RMS reconstruction error.
//!
//! All operations are deterministic: noise is generated from an explicit
//! seed, and no function reads ambient state.

pub mod analysis;
pub mod error;
mod fft;
pub mod patterns;
pub mod recon;
pub mod scene;
pub mod simulator;

pub use error::{Error, Result};

/// Vacuum speed of light in mm/ps.
pub const C_MM_PER_PS: f64 = 0.299792458;
