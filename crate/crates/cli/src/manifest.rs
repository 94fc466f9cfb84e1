//! Run manifest: the full parameter set of a simulate or sweep run, written
//! as `manifest.json` next to the outputs so any run can be re-derived and
//! repeated exactly.

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub t0_ps: f64,
    pub dt_ps: f64,
    pub nt: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseParams {
    pub center_ps: f64,
    pub width_ps: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    pub additive_sigma: f64,
    pub multiplicative_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Scene as given on the command line: a builtin name or a file path.
    pub scene: String,
    /// Resolved scene name.
    pub scene_name: String,
    /// Scene side length in pixels.
    pub n: usize,
    pub grid: GridParams,
    pub pulse: PulseParams,
    pub modulation_depth: f64,
    pub noise: NoiseParams,
    pub ordering: String,
    pub cr: Vec<f64>,
    pub seeds: Vec<u64>,
    pub out_dir: String,
}

impl RunManifest {
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.cr.is_empty(), "CR list must not be empty");
        for &cr in &self.cr {
            ensure!(
                cr > 0.0 && cr <= 1.0,
                "compression ratio {cr} outside (0, 1]"
            );
        }
        ensure!(!self.seeds.is_empty(), "seed list must not be empty");
        ensure!(
            self.modulation_depth > 0.0 && self.modulation_depth <= 1.0,
            "modulation depth {} outside (0, 1]",
            self.modulation_depth
        );
        ensure!(
            self.noise.additive_sigma >= 0.0 && self.noise.multiplicative_sigma >= 0.0,
            "noise sigmas must be non-negative"
        );
        Ok(())
    }

    /// Write `manifest.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).context("cannot serialize manifest")?;
        let mut bytes = json.into_bytes();
        bytes.push(b'\n');
        crate::formats::write_verified(&dir.join(MANIFEST_FILE), &bytes)
    }

    /// Read `manifest.json` from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path)
            .with_context(|| format!("cannot read manifest '{}'", path.display()))?;
        let manifest: Self = serde_json::from_str(&text)
            .with_context(|| format!("invalid manifest '{}'", path.display()))?;
        manifest.validate()?;
        Ok(manifest)
    }
}
