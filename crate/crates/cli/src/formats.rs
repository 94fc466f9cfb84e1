//! Binary measurement and cube files.
//!
//! Measurement file: magic `THZM`, format version (u32 LE), N and nt
//! (u32 LE), t0 and dt (f64 LE), modulation depth (f64 LE), ordering label
//! (u32 LE byte length + UTF-8 bytes), m (u32 LE), then m·nt f64 LE samples
//! record-major.
//!
//! Cube file: magic `THZC`, version, n and nt (u32 LE), t0 and dt (f64 LE),
//! then n²·nt f64 LE samples, pixel-major in row-major pixel order, time
//! fastest-varying.
//!
//! The noise model is run metadata and lives in the manifest, not here.

use anyhow::{ensure, Context, Result};
use ndarray::Array2;
use std::fs;
use std::path::Path;
use terapix::simulator::{DataCube, MeasurementSet, NoiseModel, TimeGrid};

pub const MEASUREMENT_MAGIC: [u8; 4] = *b"THZM";
pub const CUBE_MAGIC: [u8; 4] = *b"THZC";
pub const FORMAT_VERSION: u32 = 1;

const MAX_LABEL_BYTES: u32 = 1024;

/// Write `bytes` to `path` and read them back to confirm the file holds
/// exactly what was intended.
pub fn write_verified(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create directory '{}'", parent.display()))?;
        }
    }
    fs::write(path, bytes).with_context(|| format!("cannot write '{}'", path.display()))?;
    let back =
        fs::read(path).with_context(|| format!("cannot read back '{}'", path.display()))?;
    ensure!(
        back == bytes,
        "verification failed: '{}' does not hold the written bytes",
        path.display()
    );
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        ensure!(
            self.pos + len <= self.buf.len(),
            "truncated {} file",
            self.what
        );
        let slice = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn finish(&self) -> Result<()> {
        ensure!(
            self.pos == self.buf.len(),
            "trailing data after {} payload",
            self.what
        );
        Ok(())
    }
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn read_samples(cursor: &mut Cursor, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let raw = cursor.take(rows * cols * 8)?;
    let mut data = Vec::with_capacity(rows * cols);
    for chunk in raw.chunks_exact(8) {
        data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok(Array2::from_shape_vec((rows, cols), data).expect("shape matches the byte count"))
}

pub fn encode_measurement(meas: &MeasurementSet) -> Vec<u8> {
    let grid = meas.grid();
    let label = meas.ordering_name().as_bytes();
    let mut buf =
        Vec::with_capacity(44 + label.len() + meas.m() * grid.nt() * 8);
    buf.extend_from_slice(&MEASUREMENT_MAGIC);
    push_u32(&mut buf, FORMAT_VERSION);
    push_u32(&mut buf, meas.pattern_count() as u32);
    push_u32(&mut buf, grid.nt() as u32);
    push_f64(&mut buf, grid.t0());
    push_f64(&mut buf, grid.dt());
    push_f64(&mut buf, meas.modulation_depth());
    push_u32(&mut buf, label.len() as u32);
    buf.extend_from_slice(label);
    push_u32(&mut buf, meas.m() as u32);
    for row in meas.records().outer_iter() {
        for &v in row {
            push_f64(&mut buf, v);
        }
    }
    buf
}

/// Decode a measurement file. The noise model is not serialized, so the
/// result carries a zero-sigma placeholder.
pub fn decode_measurement(bytes: &[u8]) -> Result<MeasurementSet> {
    let mut cursor = Cursor {
        buf: bytes,
        pos: 0,
        what: "measurement",
    };
    let magic = cursor.take(4)?;
    ensure!(
        magic == MEASUREMENT_MAGIC,
        "bad magic: not a measurement file"
    );
    let version = cursor.u32()?;
    ensure!(
        version == FORMAT_VERSION,
        "unsupported measurement format version {version}"
    );
    let pattern_count = cursor.u32()? as usize;
    let nt = cursor.u32()? as usize;
    let t0 = cursor.f64()?;
    let dt = cursor.f64()?;
    let mu = cursor.f64()?;
    ensure!(
        mu > 0.0 && mu <= 1.0,
        "modulation depth {mu} outside (0, 1]"
    );
    let label_len = cursor.u32()?;
    ensure!(
        label_len <= MAX_LABEL_BYTES,
        "corrupt ordering label length {label_len}"
    );
    let label = std::str::from_utf8(cursor.take(label_len as usize)?)
        .context("ordering label is not UTF-8")?
        .to_owned();
    let m = cursor.u32()? as usize;
    ensure!(
        m >= 1 && m <= pattern_count,
        "record count {m} outside 1..={pattern_count}"
    );
    let grid = TimeGrid::new(t0, dt, nt).map_err(|e| anyhow::anyhow!("{e}"))?;
    let records = read_samples(&mut cursor, m, nt)?;
    cursor.finish()?;
    MeasurementSet::new(
        pattern_count,
        label,
        mu,
        grid,
        records,
        NoiseModel::noiseless(),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn encode_cube(cube: &DataCube) -> Vec<u8> {
    let grid = cube.grid();
    let mut buf = Vec::with_capacity(36 + cube.pixel_count() * grid.nt() * 8);
    buf.extend_from_slice(&CUBE_MAGIC);
    push_u32(&mut buf, FORMAT_VERSION);
    push_u32(&mut buf, cube.n() as u32);
    push_u32(&mut buf, grid.nt() as u32);
    push_f64(&mut buf, grid.t0());
    push_f64(&mut buf, grid.dt());
    for row in cube.fields().outer_iter() {
        for &v in row {
            push_f64(&mut buf, v);
        }
    }
    buf
}

pub fn decode_cube(bytes: &[u8]) -> Result<DataCube> {
    let mut cursor = Cursor {
        buf: bytes,
        pos: 0,
        what: "cube",
    };
    let magic = cursor.take(4)?;
    ensure!(magic == CUBE_MAGIC, "bad magic: not a cube file");
    let version = cursor.u32()?;
    ensure!(
        version == FORMAT_VERSION,
        "unsupported cube format version {version}"
    );
    let n = cursor.u32()? as usize;
    ensure!(n >= 1, "cube side length must be at least 1");
    let nt = cursor.u32()? as usize;
    let t0 = cursor.f64()?;
    let dt = cursor.f64()?;
    let grid = TimeGrid::new(t0, dt, nt).map_err(|e| anyhow::anyhow!("{e}"))?;
    let fields = read_samples(&mut cursor, n * n, nt)?;
    cursor.finish()?;
    DataCube::new(n, grid, fields).map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn write_measurement(path: &Path, meas: &MeasurementSet) -> Result<()> {
    write_verified(path, &encode_measurement(meas))
}

pub fn read_measurement(path: &Path) -> Result<MeasurementSet> {
    let bytes = fs::read(path)
        .with_context(|| format!("cannot read measurement file '{}'", path.display()))?;
    decode_measurement(&bytes)
        .with_context(|| format!("invalid measurement file '{}'", path.display()))
}

pub fn write_cube(path: &Path, cube: &DataCube) -> Result<()> {
    write_verified(path, &encode_cube(cube))
}

pub fn read_cube(path: &Path) -> Result<DataCube> {
    let bytes = fs::read(path)
        .with_context(|| format!("cannot read cube file '{}'", path.display()))?;
    decode_cube(&bytes).with_context(|| format!("invalid cube file '{}'", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn sample_measurement() -> MeasurementSet {
        let grid = TimeGrid::new(0.0, 0.05, 16).unwrap();
        let records =
            Array2::from_shape_fn((3, 16), |(i, t)| (i as f64 + 1.0) * 0.25 + t as f64 * 0.5);
        MeasurementSet::new(4, "sequency2d", 0.95, grid, records, NoiseModel::noiseless())
            .unwrap()
    }

    fn sample_cube() -> DataCube {
        let grid = TimeGrid::new(-1.0, 0.1, 8).unwrap();
        let fields = Array2::from_shape_fn((4, 8), |(p, t)| p as f64 - t as f64 * 0.125);
        DataCube::new(2, grid, fields).unwrap()
    }

    #[test]
    fn measurement_encoding_round_trips() {
        let meas = sample_measurement();
        let bytes = encode_measurement(&meas);
        let back = decode_measurement(&bytes).unwrap();
        assert_eq!(back.pattern_count(), 4);
        assert_eq!(back.ordering_name(), "sequency2d");
        assert_eq!(back.modulation_depth(), 0.95);
        assert_eq!(back.m(), 3);
        assert_eq!(back.records(), meas.records());
        assert_eq!(encode_measurement(&back), bytes);
    }

    #[test]
    fn cube_encoding_round_trips() {
        let cube = sample_cube();
        let bytes = encode_cube(&cube);
        let back = decode_cube(&bytes).unwrap();
        assert_eq!(back, cube);
        assert_eq!(encode_cube(&back), bytes);
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let bytes = encode_measurement(&sample_measurement());

        let err = decode_measurement(&bytes[..bytes.len() - 1]).unwrap_err();
        assert!(err.to_string().contains("truncated"));

        let mut wrong_magic = bytes.clone();
        wrong_magic[0] = b'X';
        let err = decode_measurement(&wrong_magic).unwrap_err();
        assert!(err.to_string().contains("magic"));

        let mut trailing = bytes.clone();
        trailing.push(0);
        let err = decode_measurement(&trailing).unwrap_err();
        assert!(err.to_string().contains("trailing"));

        let mut bad_version = bytes;
        bad_version[4..8].copy_from_slice(&9u32.to_le_bytes());
        let err = decode_measurement(&bad_version).unwrap_err();
        assert!(err.to_string().contains("version"));

        let cube_bytes = encode_cube(&sample_cube());
        assert!(decode_cube(&cube_bytes[..10]).is_err());
        assert!(decode_measurement(&cube_bytes).is_err());
    }
}
