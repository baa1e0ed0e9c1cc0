//! Artifact serialization: ASCII PGM images and two-column CSV curves.
//!
//! Images are written as portable graymap "P2" with a 16-bit range. Real
//! photon counts are mapped onto that range by a scale factor recorded in a
//! comment, alongside the scan geometry, so images remain quantitatively
//! interpretable:
//!
//! ```text
//! P2
//! # origin_nm <x> <y>
//! # pitch_nm <p>
//! # scale <s>
//! <width> <height>
//! 65535
//! <row 0 values> ...
//! ```
//!
//! A pixel integer divided by `scale` recovers the original value.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scan::ScanImage;

pub const PGM_MAXVAL: u32 = 65535;

/// Rounds to the nearest integer, ties to even, as a non-negative integer
/// clamped to the PGM range.
fn quantize(value: f64) -> u32 {
    let r = value.round_ties_even();
    if r <= 0.0 {
        0
    } else if r >= PGM_MAXVAL as f64 {
        PGM_MAXVAL
    } else {
        r as u32
    }
}

/// Renders an image to the ASCII PGM format described in the module docs.
/// The scale factor maps the image maximum to the top of the 16-bit range;
/// an all-zero (or empty) image records scale 1.
pub fn pgm_string(image: &ScanImage) -> String {
    let max = image.values.iter().copied().fold(0.0f64, f64::max);
    let scale = if max > 0.0 { PGM_MAXVAL as f64 / max } else { 1.0 };
    let mut out = String::new();
    out.push_str("P2\n");
    let _ = writeln!(out, "# origin_nm {} {}", image.origin[0], image.origin[1]);
    let _ = writeln!(out, "# pitch_nm {}", image.pitch);
    let _ = writeln!(out, "# scale {}", scale);
    let _ = writeln!(out, "{} {}", image.width, image.height);
    let _ = writeln!(out, "{PGM_MAXVAL}");
    for row in 0..image.height {
        let vals = image.row(row);
        for (c, v) in vals.iter().enumerate() {
            if c > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", quantize(v * scale));
        }
        out.push('\n');
    }
    out
}

pub fn write_pgm(image: &ScanImage, path: &Path) -> std::io::Result<()> {
    fs::write(path, pgm_string(image))
}

/// Renders a two-column CSV with the given abscissa header (e.g.
/// `position_nm`, `frequency_mhz`, `time_us`, `tau_us`); the second column
/// is always `value`. Unix newlines, `.` decimal point.
pub fn curve_csv_string(abscissa_name: &str, rows: &[(f64, f64)]) -> String {
    let mut out = String::with_capacity(16 + rows.len() * 24);
    let _ = writeln!(out, "{abscissa_name},value");
    for &(x, y) in rows {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

pub fn write_curve_csv(path: &Path, abscissa_name: &str, rows: &[(f64, f64)]) -> std::io::Result<()> {
    fs::write(path, curve_csv_string(abscissa_name, rows))
}

/// Parses the two-column CSV curve format back into (abscissa, value) pairs.
/// The header line is required; its abscissa name is returned alongside the
/// data so callers can check units.
pub fn parse_curve_csv(text: &str) -> Result<(String, Vec<(f64, f64)>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid("empty CSV: missing header line"))?;
    let (name, second) = header
        .split_once(',')
        .ok_or_else(|| Error::invalid(format!("malformed CSV header {header:?}")))?;
    if second.trim() != "value" {
        return Err(Error::invalid(format!(
            "CSV header must end in \"value\", got {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| {
            Error::invalid(format!("CSV line {}: expected two columns", lineno + 2))
        })?;
        let x: f64 = a.trim().parse().map_err(|_| {
            Error::invalid(format!("CSV line {}: bad number {a:?}", lineno + 2))
        })?;
        let y: f64 = b.trim().parse().map_err(|_| {
            Error::invalid(format!("CSV line {}: bad number {b:?}", lineno + 2))
        })?;
        rows.push((x, y));
    }
    Ok((name.trim().to_string(), rows))
}
