//! Layered dielectric scenes and their per-pixel transfer functions.
//!
//! A scene is an n×n grid of pixel columns. Each column stacks zero or more
//! material layers; an empty column is free space. Propagation through a
//! column multiplies the field spectrum by a complex transfer function with
//! a phase term from the optical path excess `(n_r − 1)·d` and an amplitude
//! term from Lorentzian absorption lines. Fresnel losses, etalon echoes and
//! index dispersion are deliberately out of scope: they would add uniform,
//! thickness-independent factors that shift neither pulse delays nor line
//! contrast.

use crate::error::{Error, Result};
use crate::C_MM_PER_PS;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

/// Lorentzian power-absorption line.
///
/// Contributes `α₀·(γ/2)² / ((f − f₀)² + (γ/2)²)` (in 1/cm) to the power
/// absorption coefficient at frequency `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionLine {
    /// Line center f₀ in THz.
    pub f0_thz: f64,
    /// Full width at half maximum γ in THz.
    pub fwhm_thz: f64,
    /// Peak power absorption α₀ in 1/cm.
    pub alpha0_per_cm: f64,
}

impl AbsorptionLine {
    /// Power absorption contribution at `f_thz`, in 1/cm.
    pub fn power_absorption(&self, f_thz: f64) -> f64 {
        let half = self.fwhm_thz / 2.0;
        self.alpha0_per_cm * half * half / ((f_thz - self.f0_thz).powi(2) + half * half)
    }
}

/// Dielectric with a frequency-independent refractive index plus additive
/// absorption lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    /// Refractive index, ≥ 1.
    pub n_r: f64,
    pub lines: Vec<AbsorptionLine>,
}

/// One material slab inside a pixel column.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub material: Arc<Material>,
    pub d_mm: f64,
}

/// Ordered layer stack behind one pixel. Empty means free space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PixelColumn {
    pub layers: Vec<Layer>,
}

impl PixelColumn {
    pub fn free_space() -> Self {
        Self::default()
    }

    pub fn is_free_space(&self) -> bool {
        self.layers.is_empty()
    }

    /// Total material thickness in mm.
    pub fn total_thickness_mm(&self) -> f64 {
        self.layers.iter().map(|l| l.d_mm).sum()
    }
}

/// n×n grid of pixel columns with the material table used to build them.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    name: String,
    n: usize,
    pixel_pitch_mm: f64,
    columns: Vec<PixelColumn>,
    materials: BTreeMap<String, Arc<Material>>,
}

impl Scene {
    /// Validate invariants and assemble a scene. Columns are row-major.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        pixel_pitch_mm: f64,
        columns: Vec<PixelColumn>,
        materials: BTreeMap<String, Arc<Material>>,
    ) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::SceneInvalid(format!(
                "n must be a power of 2 (got {n})"
            )));
        }
        if !(pixel_pitch_mm > 0.0 && pixel_pitch_mm.is_finite()) {
            return Err(Error::SceneInvalid(format!(
                "pixel_pitch_mm must be positive and finite (got {pixel_pitch_mm})"
            )));
        }
        if columns.len() != n * n {
            return Err(Error::SceneInvalid(format!(
                "grid holds {} columns, expected n² = {}",
                columns.len(),
                n * n
            )));
        }
        for (name, material) in &materials {
            if !(material.n_r >= 1.0 && material.n_r.is_finite()) {
                return Err(Error::SceneInvalid(format!(
                    "material '{name}': refractive index {} must be ≥ 1",
                    material.n_r
                )));
            }
            for line in &material.lines {
                if !(line.f0_thz > 0.0 && line.fwhm_thz > 0.0 && line.alpha0_per_cm >= 0.0) {
                    return Err(Error::SceneInvalid(format!(
                        "material '{name}': absorption line needs f₀ > 0, γ > 0, α₀ ≥ 0"
                    )));
                }
            }
        }
        for (index, column) in columns.iter().enumerate() {
            for layer in &column.layers {
                if !(layer.d_mm >= 0.0 && layer.d_mm.is_finite()) {
                    return Err(Error::SceneInvalid(format!(
                        "column {index}: layer thickness {} mm must be ≥ 0",
                        layer.d_mm
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            n,
            pixel_pitch_mm,
            columns,
            materials,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Side length in pixels.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total pixel count N = n².
    pub fn pixel_count(&self) -> usize {
        self.n * self.n
    }

    pub fn pixel_pitch_mm(&self) -> f64 {
        self.pixel_pitch_mm
    }

    /// Columns in row-major pixel order.
    pub fn columns(&self) -> &[PixelColumn] {
        &self.columns
    }

    /// Column at a flattened row-major pixel index.
    pub fn column(&self, pixel: usize) -> &PixelColumn {
        &self.columns[pixel]
    }

    pub fn materials(&self) -> &BTreeMap<String, Arc<Material>> {
        &self.materials
    }

    /// Per-pixel total material thickness in mm, the ground truth a
    /// time-of-flight map should recover.
    pub fn total_thickness_mm(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n, self.n), |(r, c)| {
            self.columns[r * self.n + c].total_thickness_mm()
        })
    }

    /// Serialize to the scene configuration document format.
    pub fn to_config_json(&self) -> String {
        let file = SceneFile {
            name: Some(self.name.clone()),
            n: self.n,
            pixel_pitch_mm: self.pixel_pitch_mm,
            materials: self
                .materials
                .iter()
                .map(|(name, m)| {
                    (
                        name.clone(),
                        MaterialFile {
                            n_r: m.n_r,
                            lines: m
                                .lines
                                .iter()
                                .map(|l| LineFile {
                                    f0_thz: l.f0_thz,
                                    fwhm_thz: l.fwhm_thz,
                                    alpha0_per_cm: l.alpha0_per_cm,
                                })
                                .collect(),
                        },
                    )
                })
                .collect(),
            grid: self
                .columns
                .chunks(self.n)
                .map(|row| {
                    row.iter()
                        .map(|column| {
                            if column.is_free_space() {
                                None
                            } else {
                                Some(
                                    column
                                        .layers
                                        .iter()
                                        .map(|l| LayerFile {
                                            material: l.material.name.clone(),
                                            d_mm: l.d_mm,
                                        })
                                        .collect(),
                                )
                            }
                        })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("scene file serialization cannot fail")
    }
}

/// Scene configuration document.
///
/// JSON with top-level keys `n`, `pixel_pitch_mm`, `materials`
/// (name → {`n_r`, `lines`: [{`f0_thz`, `fwhm_thz`, `alpha0_per_cm`}]}),
/// `grid` (n rows of n entries, each `null` for free space or a list of
/// {`material`, `d_mm`} layers) and an optional `name`. Unknown keys are
/// rejected.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    n: usize,
    pixel_pitch_mm: f64,
    materials: BTreeMap<String, MaterialFile>,
    grid: Vec<Vec<Option<Vec<LayerFile>>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialFile {
    n_r: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    lines: Vec<LineFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineFile {
    f0_thz: f64,
    fwhm_thz: f64,
    alpha0_per_cm: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    material: String,
    d_mm: f64,
}

/// Parse a scene configuration document (see [`Scene::to_config_json`] for
/// the schema) and validate all invariants.
pub fn load_scene(config_text: &str) -> Result<Scene> {
    let file: SceneFile = serde_json::from_str(config_text)?;
    let materials: BTreeMap<String, Arc<Material>> = file
        .materials
        .into_iter()
        .map(|(name, m)| {
            let material = Arc::new(Material {
                name: name.clone(),
                n_r: m.n_r,
                lines: m
                    .lines
                    .into_iter()
                    .map(|l| AbsorptionLine {
                        f0_thz: l.f0_thz,
                        fwhm_thz: l.fwhm_thz,
                        alpha0_per_cm: l.alpha0_per_cm,
                    })
                    .collect(),
            });
            (name, material)
        })
        .collect();

    if file.grid.len() != file.n {
        return Err(Error::SceneInvalid(format!(
            "grid has {} rows, expected n = {}",
            file.grid.len(),
            file.n
        )));
    }
    let mut columns = Vec::with_capacity(file.n * file.n);
    for (r, row) in file.grid.into_iter().enumerate() {
        if row.len() != file.n {
            return Err(Error::SceneInvalid(format!(
                "grid row {r} has {} entries, expected n = {}",
                row.len(),
                file.n
            )));
        }
        for entry in row {
            let layers = match entry {
                None => Vec::new(),
                Some(layer_files) => layer_files
                    .into_iter()
                    .map(|lf| {
                        let material = materials.get(&lf.material).cloned().ok_or_else(|| {
                            Error::SceneInvalid(format!(
                                "grid references undefined material '{}'",
                                lf.material
                            ))
                        })?;
                        Ok(Layer {
                            material,
                            d_mm: lf.d_mm,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            columns.push(PixelColumn { layers });
        }
    }

    Scene::new(
        file.name.unwrap_or_else(|| "custom".to_owned()),
        file.n,
        file.pixel_pitch_mm,
        columns,
        materials,
    )
}

/// Complex transfer function of one pixel column at the given frequencies.
///
/// Each layer multiplies by `exp(−i·2πf·(n_r − 1)·d/c) · exp(−α_p(f)·d_cm/2)`
/// with `c` in mm/ps and the Lorentzian power absorption α_p in 1/cm, so the
/// field amplitude decays with α_p/2. Phases are relative to the same
/// geometric path in free space; a free-space column returns all ones.
pub fn pixel_transfer_function(column: &PixelColumn, freqs_thz: &[f64]) -> Vec<Complex64> {
    let mut transfer = vec![Complex64::new(1.0, 0.0); freqs_thz.len()];
    for layer in &column.layers {
        let material = &layer.material;
        let delay_ps = (material.n_r - 1.0) * layer.d_mm / C_MM_PER_PS;
        let d_cm = layer.d_mm / 10.0;
        for (t, &f) in transfer.iter_mut().zip(freqs_thz) {
            let alpha: f64 = material.lines.iter().map(|l| l.power_absorption(f)).sum();
            *t *= Complex64::from_polar((-alpha * d_cm / 2.0).exp(), -TAU * f * delay_ps);
        }
    }
    transfer
}

/// Names accepted by [`builtin_scene`].
pub fn builtin_scene_names() -> Vec<&'static str> {
    vec!["tz-hdpe-16", "lactose-l-8"]
}

/// Construct one of the built-in samples.
///
/// `"tz-hdpe-16"`: a 16×16 slab of HDPE (n_r = 1.58), 2 mm thick, with the
/// letter T carved all the way through (0 mm left) and the letter Z carved
/// 1 mm deep (1 mm left).
///
/// `"lactose-l-8"`: an 8×8 field holding two 0.7 mm pellets, an L-shaped one
/// of a lactose/PTFE mixture (n_r = 1.45, one absorption line at 1.3 THz)
/// and a rectangular one of pure PTFE (n_r = 1.45, no lines); the rest is
/// free space.
pub fn builtin_scene(name: &str) -> Result<Scene> {
    match name {
        "tz-hdpe-16" => Ok(tz_hdpe_16()),
        "lactose-l-8" => Ok(lactose_l_8()),
        other => Err(Error::UnknownScene(other.to_owned())),
    }
}

/// 16×16 bitmap of the carved HDPE slab: '.' full 2 mm slab, 'T' carved to
/// 0 mm, 'Z' carved to 1 mm.
const TZ_HDPE_16: [&str; 16] = [
    "................",
    "................",
    "................",
    "................",
    "..TTTTT..ZZZZZ..",
    "....T........Z..",
    "....T.......Z...",
    "....T......Z....",
    "....T.....Z.....",
    "....T....Z......",
    "....T....ZZZZZ..",
    "................",
    "................",
    "................",
    "................",
    "................",
];

/// 8×8 bitmap of the pellet pair: 'L' lactose/PTFE mixture, 'P' pure PTFE,
/// '.' free space. Both pellets are 0.7 mm thick.
const LACTOSE_L_8: [&str; 8] = [
    "........",
    ".L...PP.",
    ".L...PP.",
    ".L...PP.",
    ".L...PP.",
    ".L...PP.",
    ".LLL.PP.",
    "........",
];

/// Lactose line defaults: the line position is a literature value, the width
/// and strength are model assumptions sized so a 0.7 mm pellet transmits
/// ≈ 35% field amplitude at line center. Override via a scene config file if
/// measured values are available.
const LACTOSE_LINE: AbsorptionLine = AbsorptionLine {
    f0_thz: 1.3,
    fwhm_thz: 0.1,
    alpha0_per_cm: 30.0,
};

fn hdpe() -> Arc<Material> {
    Arc::new(Material {
        name: "hdpe".to_owned(),
        n_r: 1.58,
        lines: Vec::new(),
    })
}

fn ptfe() -> Arc<Material> {
    Arc::new(Material {
        name: "ptfe".to_owned(),
        n_r: 1.45,
        lines: Vec::new(),
    })
}

fn ptfe_lactose() -> Arc<Material> {
    Arc::new(Material {
        name: "ptfe-lactose".to_owned(),
        n_r: 1.45,
        lines: vec![LACTOSE_LINE],
    })
}

fn scene_from_bitmap(
    name: &str,
    pixel_pitch_mm: f64,
    bitmap: &[&str],
    assign: impl Fn(char) -> Option<(Arc<Material>, f64)>,
) -> Scene {
    let n = bitmap.len();
    let mut columns = Vec::with_capacity(n * n);
    let mut materials = BTreeMap::new();
    for row in bitmap {
        assert_eq!(row.len(), n, "bitmap rows must be square");
        for ch in row.chars() {
            let layers = match assign(ch) {
                None => Vec::new(),
                Some((material, d_mm)) => {
                    materials
                        .entry(material.name.clone())
                        .or_insert_with(|| Arc::clone(&material));
                    vec![Layer { material, d_mm }]
                }
            };
            columns.push(PixelColumn { layers });
        }
    }
    Scene::new(name, n, pixel_pitch_mm, columns, materials)
        .expect("built-in bitmaps satisfy all invariants")
}

fn tz_hdpe_16() -> Scene {
    let slab = hdpe();
    scene_from_bitmap("tz-hdpe-16", 1.0, &TZ_HDPE_16, |ch| match ch {
        '.' => Some((Arc::clone(&slab), 2.0)),
        'T' => None,
        'Z' => Some((Arc::clone(&slab), 1.0)),
        _ => unreachable!("bitmap uses only '.', 'T', 'Z'"),
    })
}

fn lactose_l_8() -> Scene {
    let mixture = ptfe_lactose();
    let pure = ptfe();
    scene_from_bitmap("lactose-l-8", 1.5, &LACTOSE_L_8, |ch| match ch {
        '.' => None,
        'L' => Some((Arc::clone(&mixture), 0.7)),
        'P' => Some((Arc::clone(&pure), 0.7)),
        _ => unreachable!("bitmap uses only '.', 'L', 'P'"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tz_scene_has_three_thickness_classes() {
        let scene = builtin_scene("tz-hdpe-16").unwrap();
        assert_eq!(scene.n(), 16);
        assert_eq!(scene.columns().len(), 256);
        let mut counts = [0usize; 3];
        for column in scene.columns() {
            let d = column.total_thickness_mm();
            let class = [0.0, 1.0, 2.0]
                .iter()
                .position(|&v| (d - v).abs() < 1e-12)
                .expect("thickness must be one of 0, 1, 2 mm");
            counts[class] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0), "{counts:?}");
        assert_eq!(counts.iter().sum::<usize>(), 256);
        let hdpe = &scene.materials()["hdpe"];
        assert_eq!(hdpe.n_r, 1.58);
        assert!(hdpe.lines.is_empty());
    }

    #[test]
    fn lactose_scene_pellets_are_uniform_thickness() {
        let scene = builtin_scene("lactose-l-8").unwrap();
        assert_eq!(scene.n(), 8);
        assert_eq!(scene.columns().len(), 64);
        let mut lactose = 0;
        let mut ptfe_only = 0;
        let mut free = 0;
        for column in scene.columns() {
            if column.is_free_space() {
                free += 1;
                continue;
            }
            assert_relative_eq!(column.total_thickness_mm(), 0.7);
            let material = &column.layers[0].material;
            if material.lines.is_empty() {
                ptfe_only += 1;
            } else {
                lactose += 1;
                assert_eq!(material.lines.len(), 1);
                assert_eq!(material.lines[0].f0_thz, 1.3);
            }
            assert_eq!(material.n_r, 1.45);
        }
        assert!(lactose > 0 && ptfe_only > 0 && free > 0);
    }

    #[test]
    fn unknown_builtin_rejected() {
        assert!(matches!(
            builtin_scene("foo"),
            Err(Error::UnknownScene(name)) if name == "foo"
        ));
    }

    #[test]
    fn load_all_free_space() {
        let scene = load_scene(
            r#"{"n": 2, "pixel_pitch_mm": 1.0, "materials": {},
                "grid": [[null, null], [null, null]]}"#,
        )
        .unwrap();
        assert_eq!(scene.columns().len(), 4);
        assert!(scene.columns().iter().all(|c| c.is_free_space()));
    }

    #[test]
    fn load_rejects_non_power_of_two() {
        let err = load_scene(
            r#"{"n": 3, "pixel_pitch_mm": 1.0, "materials": {},
                "grid": [[null,null,null],[null,null,null],[null,null,null]]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("n must be a power of 2"));
    }

    #[test]
    fn load_rejects_unknown_keys() {
        let err = load_scene(
            r#"{"n": 2, "pixel_pitch_mm": 1.0, "materials": {}, "banana": 1,
                "grid": [[null, null], [null, null]]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SceneParse(_)));
        assert!(err.to_string().contains("banana"));
    }

    #[test]
    fn load_rejects_undefined_material() {
        let err = load_scene(
            r#"{"n": 2, "pixel_pitch_mm": 1.0, "materials": {},
                "grid": [[[{"material": "ghost", "d_mm": 1.0}], null], [null, null]]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("ghost"));
    }

    #[test]
    fn load_rejects_ragged_grid() {
        let err = load_scene(
            r#"{"n": 2, "pixel_pitch_mm": 1.0, "materials": {},
                "grid": [[null, null], [null]]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn builtin_scenes_round_trip() {
        for name in builtin_scene_names() {
            let scene = builtin_scene(name).unwrap();
            let reloaded = load_scene(&scene.to_config_json()).unwrap();
            assert_eq!(scene, reloaded);
        }
    }

    #[test]
    fn free_space_transfer_is_unity() {
        let column = PixelColumn::free_space();
        let transfer = pixel_transfer_function(&column, &[0.0, 0.5, 1.0, 2.5]);
        assert!(transfer.iter().all(|t| *t == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn hdpe_slab_is_pure_phase_with_known_delay() {
        let column = PixelColumn {
            layers: vec![Layer {
                material: hdpe(),
                d_mm: 2.0,
            }],
        };
        let freqs = [0.0, 0.001, 0.002, 1.0];
        let transfer = pixel_transfer_function(&column, &freqs);
        assert_eq!(transfer[0], Complex64::new(1.0, 0.0));
        for t in &transfer {
            assert_relative_eq!(t.norm(), 1.0, max_relative = 1e-12);
        }
        // Phase slope dφ/d(2πf) = −(n_r−1)d/c, evaluated below any wrap.
        let slope = (transfer[2].arg() - transfer[1].arg()) / (TAU * (freqs[2] - freqs[1]));
        let delay = 0.58 * 2.0 / C_MM_PER_PS;
        assert_relative_eq!(-slope, delay, epsilon = 1e-9);
        assert_relative_eq!(delay, 3.8693435, epsilon = 1e-6);
    }

    #[test]
    fn lactose_line_magnitudes() {
        let column = PixelColumn {
            layers: vec![Layer {
                material: ptfe_lactose(),
                d_mm: 0.7,
            }],
        };
        let transfer = pixel_transfer_function(&column, &[1.3, 1.0]);
        // exp(−30 · 0.07 / 2) at line center.
        assert_relative_eq!(transfer[0].norm(), 0.349938, epsilon = 1e-6);
        // 0.3 THz detuning: Lorentzian factor 0.0025/0.0925, then
        // exp(−30·(0.0025/0.0925)·0.07/2).
        assert_relative_eq!(transfer[1].norm(), 0.972020, epsilon = 1e-6);
    }

    #[test]
    fn transfer_magnitude_never_exceeds_one() {
        let scene = builtin_scene("lactose-l-8").unwrap();
        let freqs: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        for column in scene.columns() {
            for t in pixel_transfer_function(column, &freqs) {
                assert!(t.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn stacked_column_transfer_is_product_of_layers() {
        let freqs = [0.3, 0.9, 1.3, 1.7];
        let lower = Layer {
            material: hdpe(),
            d_mm: 1.2,
        };
        let upper = Layer {
            material: ptfe_lactose(),
            d_mm: 0.4,
        };
        let stacked = PixelColumn {
            layers: vec![lower.clone(), upper.clone()],
        };
        let only_lower = PixelColumn {
            layers: vec![lower],
        };
        let only_upper = PixelColumn {
            layers: vec![upper],
        };
        let combined = pixel_transfer_function(&stacked, &freqs);
        let product: Vec<Complex64> = pixel_transfer_function(&only_lower, &freqs)
            .iter()
            .zip(pixel_transfer_function(&only_upper, &freqs))
            .map(|(a, b)| a * b)
            .collect();
        for (c, p) in combined.iter().zip(&product) {
            assert_relative_eq!(c.re, p.re, epsilon = 1e-12);
            assert_relative_eq!(c.im, p.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_thickness_layer_equals_free_space() {
        let column = PixelColumn {
            layers: vec![Layer {
                material: hdpe(),
                d_mm: 0.0,
            }],
        };
        let transfer = pixel_transfer_function(&column, &[0.5, 1.5]);
        assert!(transfer.iter().all(|t| *t == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn invalid_material_index_rejected() {
        let mut materials = BTreeMap::new();
        materials.insert(
            "thin-air".to_owned(),
            Arc::new(Material {
                name: "thin-air".to_owned(),
                n_r: 0.9,
                lines: Vec::new(),
            }),
        );
        let err = Scene::new("bad", 1, 1.0, vec![PixelColumn::free_space()], materials)
            .unwrap_err();
        assert!(err.to_string().contains("refractive index"));
    }
}
