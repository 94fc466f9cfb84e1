//! Command implementations behind the CLI surface.

use crate::args::{
    AnalyzeSpectralArgs, AnalyzeTofArgs, ReconstructArgs, SimulateArgs, SweepCrArgs,
};
use crate::formats::{read_cube, read_measurement, write_cube, write_measurement, write_verified};
use crate::images::write_image_set;
use crate::manifest::{GridParams, NoiseParams, PulseParams, RunManifest, MANIFEST_FILE};
use anyhow::{bail, ensure, Context, Result};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;
use terapix::analysis::{
    delay_map, rms_error_at_peak, spectral_image, thickness_map, DEFAULT_INVALID_THRESHOLD,
};
use terapix::patterns::{ordering_by_name, sylvester_hadamard, BinaryMaskSet, HadamardBasis};
use terapix::recon::{debias, invert, invert_full};
use terapix::scene::{builtin_scene, builtin_scene_names, load_scene, Scene};
use terapix::simulator::{
    ideal_cube, measure, synthesize_pulse, NoiseModel, TimeGrid, Waveform,
    DEFAULT_PULSE_CENTER_PS, DEFAULT_PULSE_WIDTH_PS,
};

const DEFAULT_PULSE_AMPLITUDE: f64 = 1.0;

/// Print a line to stdout. A closed pipe (e.g. piping into `head`) is not
/// an error.
fn say(text: impl std::fmt::Display) -> Result<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other.context("cannot write to stdout"),
    }
}

/// A scene argument is a builtin scene name or a path to a scene JSON file.
fn resolve_scene(arg: &str) -> Result<Scene> {
    if builtin_scene_names().contains(&arg) {
        return builtin_scene(arg).map_err(|e| anyhow::anyhow!("{e}"));
    }
    let text = fs::read_to_string(arg)
        .with_context(|| format!("cannot read scene file '{arg}'"))?;
    load_scene(&text).with_context(|| format!("invalid scene file '{arg}'"))
}

/// Number of measurements for a compression ratio: m = round(CR·N),
/// rounding half up.
pub fn measurement_count(cr: f64, pattern_count: usize) -> Result<usize> {
    ensure!(
        cr > 0.0 && cr <= 1.0,
        "compression ratio {cr} outside (0, 1]"
    );
    let m = (cr * pattern_count as f64 + 0.5).floor() as usize;
    ensure!(m >= 1, "compression ratio {cr} of {pattern_count} patterns leaves no measurements");
    Ok(m)
}

/// The sequency-ordered basis matching an n×n scene.
fn basis_for(n: usize, ordering: &str) -> Result<HadamardBasis> {
    let pattern_count = n * n;
    ensure!(
        pattern_count.is_power_of_two(),
        "pattern count {pattern_count} is not a power of two"
    );
    let natural = sylvester_hadamard(pattern_count.trailing_zeros())
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let strategy = ordering_by_name(ordering).map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(natural.with_ordering(strategy))
}

fn reference_pulse(grid: TimeGrid, pulse: &PulseParams) -> Result<Waveform> {
    synthesize_pulse(grid, pulse.center_ps, pulse.width_ps, pulse.amplitude)
        .map_err(|e| anyhow::anyhow!("{e}"))
}

fn default_pulse_params() -> PulseParams {
    PulseParams {
        center_ps: DEFAULT_PULSE_CENTER_PS,
        width_ps: DEFAULT_PULSE_WIDTH_PS,
        amplitude: DEFAULT_PULSE_AMPLITUDE,
    }
}

/// Reference pulse for analyzing a cube file: pulse parameters come from a
/// `manifest.json` next to the cube when present, defaults otherwise. The
/// waveform is synthesized on the cube's own time grid.
fn reference_for_cube(cube_path: &Path, grid: TimeGrid) -> Result<Waveform> {
    let dir = cube_path.parent().unwrap_or_else(|| Path::new("."));
    let params = if dir.join(MANIFEST_FILE).is_file() {
        RunManifest::load(dir)?.pulse
    } else {
        default_pulse_params()
    };
    reference_pulse(grid, &params)
}

fn grid_params(grid: TimeGrid) -> GridParams {
    GridParams {
        t0_ps: grid.t0(),
        dt_ps: grid.dt(),
        nt: grid.nt(),
    }
}

pub fn scene_emit(name: &str, out: Option<&Path>) -> Result<()> {
    let scene = resolve_scene(name)?;
    let json = scene.to_config_json();
    load_scene(&json).context("emitted scene does not parse back")?;
    match out {
        Some(path) => {
            let mut bytes = json.into_bytes();
            bytes.push(b'\n');
            write_verified(path, &bytes)?;
            say(format_args!("wrote {}", path.display()))?;
        }
        None => say(&json)?,
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let scene = resolve_scene(&args.scene)?;
    let grid = TimeGrid::default();
    let pulse_params = default_pulse_params();
    let pulse = reference_pulse(grid, &pulse_params)?;
    let cube = ideal_cube(&scene, &pulse);

    let basis = basis_for(scene.n(), &args.ordering)?;
    let masks = BinaryMaskSet::new(&basis, args.mu).map_err(|e| anyhow::anyhow!("{e}"))?;
    let pattern_count = basis.pattern_count();

    let manifest = RunManifest {
        scene: args.scene.clone(),
        scene_name: scene.name().to_owned(),
        n: scene.n(),
        grid: grid_params(grid),
        pulse: pulse_params,
        modulation_depth: args.mu,
        noise: NoiseParams {
            additive_sigma: args.noise_add,
            multiplicative_sigma: args.noise_mult,
        },
        ordering: args.ordering.clone(),
        cr: vec![1.0],
        seeds: args.seed.clone(),
        out_dir: args.out.display().to_string(),
    };
    manifest.validate()?;

    for &seed in &args.seed {
        let noise = NoiseModel::new(args.noise_add, args.noise_mult, seed)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let meas =
            measure(&cube, &masks, pattern_count, noise).map_err(|e| anyhow::anyhow!("{e}"))?;
        let path = args.out.join(format!("measurement-seed{seed}.thzm"));
        write_measurement(&path, &meas)?;
        say(format_args!("wrote {}", path.display()))?;
    }

    manifest.save(&args.out)?;
    say(format_args!("wrote {}", args.out.join(MANIFEST_FILE).display()))?;
    Ok(())
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    let meas = read_measurement(&args.measurement)?;
    let pattern_count = meas.pattern_count();
    ensure!(
        pattern_count.is_power_of_two(),
        "measurement file declares {pattern_count} patterns, not a power of two"
    );
    let n = (pattern_count as f64).sqrt() as usize;
    ensure!(
        n * n == pattern_count,
        "measurement file declares {pattern_count} patterns, not a square pixel grid"
    );

    let m = measurement_count(args.cr, pattern_count)?;
    ensure!(
        meas.m() >= m,
        "measurement file holds {} records but CR {} needs {m}",
        meas.m(),
        args.cr
    );

    let basis = basis_for(n, meas.ordering_name())?;
    let coeffs = debias(&meas)
        .and_then(|c| c.truncate(m))
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let cube = invert(&basis, &coeffs).map_err(|e| anyhow::anyhow!("{e}"))?;

    write_cube(&args.out, &cube)?;
    say(format_args!(
        "wrote {} ({} of {} coefficients)",
        args.out.display(),
        m,
        pattern_count
    ))?;
    Ok(())
}

pub fn analyze_tof(args: &AnalyzeTofArgs) -> Result<()> {
    let cube = read_cube(&args.cube)?;
    let reference = reference_for_cube(&args.cube, cube.grid())?;
    let delays = delay_map(&cube, &reference, DEFAULT_INVALID_THRESHOLD)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let thickness = thickness_map(&delays, args.nr).map_err(|e| anyhow::anyhow!("{e}"))?;

    for path in write_image_set(&args.out, "delay", delays.values())? {
        say(format_args!("wrote {}", path.display()))?;
    }
    for path in write_image_set(&args.out, "thickness", thickness.values())? {
        say(format_args!("wrote {}", path.display()))?;
    }
    Ok(())
}

pub fn analyze_spectral(args: &AnalyzeSpectralArgs) -> Result<()> {
    let cube = read_cube(&args.cube)?;
    let reference = reference_for_cube(&args.cube, cube.grid())?;
    let image = spectral_image(&cube, &reference, args.f0_thz, args.avg_bins)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let stem = format!("transmission-{}thz", args.f0_thz);
    for path in write_image_set(&args.out, &stem, image.values())? {
        say(format_args!("wrote {}", path.display()))?;
    }
    Ok(())
}

pub fn sweep_cr(args: &SweepCrArgs) -> Result<()> {
    let scene = resolve_scene(&args.scene)?;
    let grid = TimeGrid::default();
    let pulse_params = default_pulse_params();
    let pulse = reference_pulse(grid, &pulse_params)?;
    let cube = ideal_cube(&scene, &pulse);
    let truth = scene.total_thickness_mm();

    let basis = basis_for(scene.n(), &args.ordering)?;
    let masks = BinaryMaskSet::new(&basis, args.mu).map_err(|e| anyhow::anyhow!("{e}"))?;
    let pattern_count = basis.pattern_count();

    let manifest = RunManifest {
        scene: args.scene.clone(),
        scene_name: scene.name().to_owned(),
        n: scene.n(),
        grid: grid_params(grid),
        pulse: pulse_params,
        modulation_depth: args.mu,
        noise: NoiseParams {
            additive_sigma: args.noise_add,
            multiplicative_sigma: args.noise_mult,
        },
        ordering: args.ordering.clone(),
        cr: args.cr.clone(),
        seeds: args.seed.clone(),
        out_dir: args.out.display().to_string(),
    };
    manifest.validate()?;
    let counts = args
        .cr
        .iter()
        .map(|&cr| measurement_count(cr, pattern_count))
        .collect::<Result<Vec<_>>>()?;

    let mut csv = String::from("cr,seed,e_rms,thickness_rms_error_mm\n");
    for &seed in &args.seed {
        let noise = NoiseModel::new(args.noise_add, args.noise_mult, seed)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let meas =
            measure(&cube, &masks, pattern_count, noise).map_err(|e| anyhow::anyhow!("{e}"))?;
        let coeffs = debias(&meas).map_err(|e| anyhow::anyhow!("{e}"))?;
        let full_recon = invert_full(&basis, &coeffs).map_err(|e| anyhow::anyhow!("{e}"))?;

        for (&cr, &m) in args.cr.iter().zip(&counts) {
            let recon = coeffs
                .truncate(m)
                .and_then(|c| invert(&basis, &c))
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let e_rms =
                rms_error_at_peak(&recon, &full_recon).map_err(|e| anyhow::anyhow!("{e}"))?;
            let thickness_err = thickness_rms_error(&recon, &pulse, args.nr, &truth)?;
            writeln!(csv, "{cr},{seed},{e_rms},{thickness_err}")
                .expect("writing to a String cannot fail");
        }
    }

    let csv_path = args.out.join("sweep.csv");
    write_verified(&csv_path, csv.as_bytes())?;
    say(format_args!("wrote {}", csv_path.display()))?;
    manifest.save(&args.out)?;
    say(format_args!("wrote {}", args.out.join(MANIFEST_FILE).display()))?;
    Ok(())
}

/// RMS over pixels of (recovered thickness − true thickness). Pixels flagged
/// invalid carry a zero thickness estimate and count like any other pixel.
fn thickness_rms_error(
    recon: &terapix::simulator::DataCube,
    reference: &Waveform,
    n_r: f64,
    truth: &ndarray::Array2<f64>,
) -> Result<f64> {
    let delays = delay_map(recon, reference, DEFAULT_INVALID_THRESHOLD)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let thickness = thickness_map(&delays, n_r).map_err(|e| anyhow::anyhow!("{e}"))?;
    let values = thickness.values();
    if values.dim() != truth.dim() {
        bail!(
            "thickness map is {:?} but the scene is {:?}",
            values.dim(),
            truth.dim()
        );
    }
    let mse = values
        .iter()
        .zip(truth.iter())
        .map(|(&got, &want)| (got - want).powi(2))
        .sum::<f64>()
        / values.len() as f64;
    Ok(mse.sqrt())
}
