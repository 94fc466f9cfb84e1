//! Image export: every map is written three ways.
//!
//! `{stem}.pgm`  plain (P2) 16-bit grayscale, values scaled linearly so the
//!               map minimum maps to 0 and the maximum to 65535
//! `{stem}.csv`  full-precision values, one row of comma-separated floats
//!               per image row
//! `{stem}.range.txt`  the `min max` pair needed to undo the PGM scaling

use crate::formats::write_verified;
use anyhow::Result;
use ndarray::Array2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const PGM_MAX: f64 = 65535.0;
const PGM_VALUES_PER_LINE: usize = 11;

pub fn encode_pgm(values: &Array2<f64>) -> String {
    let (rows, cols) = values.dim();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let mut out = format!("P2\n{cols} {rows}\n65535\n");
    let mut on_line = 0usize;
    for &v in values {
        let level = if span > 0.0 {
            ((v - min) / span * PGM_MAX).round() as u32
        } else {
            0
        };
        if on_line == PGM_VALUES_PER_LINE {
            out.push('\n');
            on_line = 0;
        } else if on_line > 0 {
            out.push(' ');
        }
        write!(out, "{level}").expect("writing to a String cannot fail");
        on_line += 1;
    }
    out.push('\n');
    out
}

pub fn encode_csv(values: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in values.outer_iter() {
        let mut first = true;
        for &v in row {
            if !first {
                out.push(',');
            }
            write!(out, "{v}").expect("writing to a String cannot fail");
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn encode_range(values: &Array2<f64>) -> String {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!("{min} {max}\n")
}

/// Write the `.pgm`, `.csv`, and `.range.txt` triple for one map and return
/// the paths written.
pub fn write_image_set(dir: &Path, stem: &str, values: &Array2<f64>) -> Result<Vec<PathBuf>> {
    let pgm = dir.join(format!("{stem}.pgm"));
    let csv = dir.join(format!("{stem}.csv"));
    let range = dir.join(format!("{stem}.range.txt"));
    write_verified(&pgm, encode_pgm(values).as_bytes())?;
    write_verified(&csv, encode_csv(values).as_bytes())?;
    write_verified(&range, encode_range(values).as_bytes())?;
    Ok(vec![pgm, csv, range])
}
