//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A square pixel grid needs N = n² with n a power of two, i.e. an even
    /// log2(N).
    #[error("log2(N) = {0} is odd; patterns must tile a square pixel grid")]
    OddPatternExponent(u32),

    #[error("log2(N) = {0} exceeds the supported maximum of 16")]
    PatternSetTooLarge(u32),

    #[error("pattern index {index} out of range for a set of {count} patterns")]
    PatternIndexOutOfRange { index: usize, count: usize },

    #[error("modulation depth {0} outside (0, 1]")]
    InvalidModulationDepth(f64),

    #[error("unknown pattern ordering '{name}' (available: {available})")]
    UnknownOrdering { name: String, available: String },

    #[error("unknown built-in scene '{0}'")]
    UnknownScene(String),

    #[error("scene configuration is not valid JSON: {0}")]
    SceneParse(#[from] serde_json::Error),

    #[error("invalid scene: {0}")]
    SceneInvalid(String),

    #[error("time grid: {0}")]
    InvalidTimeGrid(String),

    #[error(
        "pulse centred at {center_ps} ps is clipped by the grid \
         (boundary amplitude above 1e-6 of the pulse peak)"
    )]
    PulseClipped { center_ps: f64 },

    #[error("pulse width must be positive, got {0} ps")]
    InvalidPulseWidth(f64),

    #[error("measurement count {m} outside 1..={max}")]
    MeasurementCountOutOfRange { m: usize, max: usize },

    #[error("modulation depth 0 carries no pattern information; cannot debias")]
    ZeroModulationDepth,

    #[error("coefficient set does not match basis: {0}")]
    BasisMismatch(String),

    #[error("full inversion needs m = N coefficients, got m = {m} of N = {n}")]
    NotFullRank { m: usize, n: usize },

    #[error("compressive inversion needs m < N, got m = {m} of N = {n}")]
    NotCompressive { m: usize, n: usize },

    #[error("refractive index must exceed 1 for thickness retrieval, got {0}")]
    InvalidRefractiveIndex(f64),

    #[error("frequency {f0_thz} THz beyond the Nyquist limit {nyquist_thz} THz")]
    BeyondNyquist { f0_thz: f64, nyquist_thz: f64 },

    #[error("reference spectrum is below 1e-9 of its maximum near {0} THz")]
    SpectralNull(f64),

    #[error("reference waveform is identically zero")]
    ZeroReference,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
