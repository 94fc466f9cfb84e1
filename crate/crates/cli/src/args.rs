//! Command-line surface.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "terapix",
    version,
    about = "Single-pixel THz imaging: simulate detector records, reconstruct \
             per-pixel waveforms, derive thickness and spectral images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scene utilities.
    Scene {
        #[command(subcommand)]
        command: SceneCommand,
    },
    /// Simulate detector records for a scene and write measurement files.
    Simulate(SimulateArgs),
    /// Reconstruct a data cube from a measurement file at a given CR.
    Reconstruct(ReconstructArgs),
    /// Derive images from a reconstructed cube.
    Analyze {
        #[command(subcommand)]
        command: AnalyzeCommand,
    },
    /// Reconstruct at several compression ratios and seeds, tabulating
    /// reconstruction error.
    SweepCr(SweepCrArgs),
}

#[derive(Debug, Subcommand)]
pub enum SceneCommand {
    /// Emit a built-in scene as a configuration document.
    Emit {
        /// Built-in scene name (tz-hdpe-16 or lactose-l-8).
        name: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in scene name or path to a scene configuration file.
    #[arg(long)]
    pub scene: String,
    /// Output directory for measurement files and the run manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Noise seeds; one measurement file is written per seed.
    #[arg(long, value_delimiter = ',', default_value = "42")]
    pub seed: Vec<u64>,
    /// Additive noise sigma as a fraction of the all-open record peak.
    #[arg(long, default_value_t = 0.005)]
    pub noise_add: f64,
    /// Per-pattern multiplicative gain jitter sigma.
    #[arg(long, default_value_t = 0.0)]
    pub noise_mult: f64,
    /// Modulation depth of the spatial modulator.
    #[arg(long, default_value_t = 0.95)]
    pub mu: f64,
    /// Pattern acquisition ordering.
    #[arg(long, default_value = "sequency2d")]
    pub ordering: String,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Measurement file produced by `simulate`.
    pub measurement: PathBuf,
    /// Compression ratio: the first round(CR·N) ordered records are used.
    #[arg(long, default_value_t = 1.0)]
    pub cr: f64,
    /// Output cube file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Time-of-flight delay and thickness images.
    Tof(AnalyzeTofArgs),
    /// Spectral transmission image at a chosen frequency.
    Spectral(AnalyzeSpectralArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeTofArgs {
    /// Cube file produced by `reconstruct`.
    pub cube: PathBuf,
    /// Output directory for image files.
    #[arg(long)]
    pub out: PathBuf,
    /// Refractive index used to convert delay to thickness.
    #[arg(long, default_value_t = 1.58)]
    pub nr: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeSpectralArgs {
    /// Cube file produced by `reconstruct`.
    pub cube: PathBuf,
    /// Output directory for image files.
    #[arg(long)]
    pub out: PathBuf,
    /// Frequency of the transmission image in THz.
    #[arg(long)]
    pub f0_thz: f64,
    /// Number of DFT bins averaged around the target frequency.
    #[arg(long, default_value_t = 3)]
    pub avg_bins: usize,
}

#[derive(Debug, Args)]
pub struct SweepCrArgs {
    /// Built-in scene name or path to a scene configuration file.
    #[arg(long)]
    pub scene: String,
    /// Output directory for the sweep table and manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Compression ratios to reconstruct at.
    #[arg(long, value_delimiter = ',', default_value = "1.0,0.8,0.6,0.4")]
    pub cr: Vec<f64>,
    /// Noise seeds; each (cr, seed) pair yields one table row.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
    pub seed: Vec<u64>,
    /// Additive noise sigma as a fraction of the all-open record peak.
    #[arg(long, default_value_t = 0.005)]
    pub noise_add: f64,
    /// Per-pattern multiplicative gain jitter sigma.
    #[arg(long, default_value_t = 0.0)]
    pub noise_mult: f64,
    /// Modulation depth of the spatial modulator.
    #[arg(long, default_value_t = 0.95)]
    pub mu: f64,
    /// Pattern acquisition ordering.
    #[arg(long, default_value = "sequency2d")]
    pub ordering: String,
    /// Refractive index used for the thickness-error column.
    #[arg(long, default_value_t = 1.58)]
    pub nr: f64,
}
