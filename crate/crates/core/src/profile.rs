//! Line profiles through scan images and sub-pixel FWHM measurement for
//! peaks and depletion dips.
//!
//! Peak widths interpolate the half-maximum crossings around the global
//! maximum, with the curve minimum as baseline. Dip widths are referenced
//! to the flanking ring crests: a depletion dark spot sits inside a bright
//! annulus beyond which the detection envelope falls to zero, so the two
//! highest local maxima bracket the dip and the lower of them serves as the
//! local baseline.

use crate::error::{Error, Result};
use crate::scan::ScanImage;

/// Which line to read out of an image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileLine {
    /// A full pixel row (positions are x in nm).
    Row(usize),
    /// A full pixel column (positions are y in nm).
    Column(usize),
    /// Nearest-pixel samples along the segment `from` → `to` (nm); positions
    /// are the distance along the segment.
    Segment {
        from: [f64; 2],
        to: [f64; 2],
        samples: usize,
    },
}

/// A 1D curve of (position nm, value).
#[derive(Debug, Clone, PartialEq)]
pub struct LineProfile {
    pub positions: Vec<f64>,
    pub values: Vec<f64>,
}

/// Whether a feature is a bright peak or a depletion dip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Peak,
    Dip,
}

/// Extracts a 1D profile from the image.
pub fn extract_line_profile(image: &ScanImage, line: ProfileLine) -> Result<LineProfile> {
    match line {
        ProfileLine::Row(row) => {
            if row >= image.height {
                return Err(Error::invalid(format!(
                    "row {row} outside image of height {}",
                    image.height
                )));
            }
            let positions = (0..image.width)
                .map(|c| image.origin[0] + c as f64 * image.pitch)
                .collect();
            Ok(LineProfile {
                positions,
                values: image.row(row).to_vec(),
            })
        }
        ProfileLine::Column(col) => {
            if col >= image.width {
                return Err(Error::invalid(format!(
                    "column {col} outside image of width {}",
                    image.width
                )));
            }
            let positions = (0..image.height)
                .map(|r| image.origin[1] + r as f64 * image.pitch)
                .collect();
            let values = (0..image.height).map(|r| image.at(r, col)).collect();
            Ok(LineProfile { positions, values })
        }
        ProfileLine::Segment { from, to, samples } => {
            if samples < 2 {
                return Err(Error::invalid("segment needs at least 2 samples"));
            }
            let mut positions = Vec::with_capacity(samples);
            let mut values = Vec::with_capacity(samples);
            let len = (to[0] - from[0]).hypot(to[1] - from[1]);
            for k in 0..samples {
                let t = k as f64 / (samples - 1) as f64;
                let x = from[0] + t * (to[0] - from[0]);
                let y = from[1] + t * (to[1] - from[1]);
                let col = ((x - image.origin[0]) / image.pitch).round();
                let row = ((y - image.origin[1]) / image.pitch).round();
                if col < 0.0
                    || row < 0.0
                    || col as usize >= image.width
                    || row as usize >= image.height
                {
                    return Err(Error::invalid(format!(
                        "segment sample ({x:.1}, {y:.1}) nm falls outside the image"
                    )));
                }
                positions.push(t * len);
                values.push(image.at(row as usize, col as usize));
            }
            Ok(LineProfile { positions, values })
        }
    }
}

/// Position of the level crossing between samples i and i+1 by linear
/// interpolation.
fn crossing(profile: &LineProfile, i: usize, level: f64) -> f64 {
    let (x0, x1) = (profile.positions[i], profile.positions[i + 1]);
    let (y0, y1) = (profile.values[i], profile.values[i + 1]);
    if y1 == y0 {
        return 0.5 * (x0 + x1);
    }
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

/// Indices of strict-left local maxima (plateau-tolerant to the right).
fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect()
}

/// Sub-pixel full width at half maximum of the curve's central feature.
///
/// `Peak`: half level between global maximum and global minimum, crossings
/// interpolated on both flanks of the maximum. `Dip`: the two highest local
/// maxima are taken as the flanking crests, the dip is the minimum between
/// them, the lower crest is the baseline, and the half level sits midway
/// between baseline and dip minimum.
pub fn fwhm_from_profile(profile: &LineProfile, kind: ExtremumKind) -> Result<f64> {
    let n = profile.values.len();
    if n < 3 || profile.positions.len() != n {
        return Err(Error::invalid(
            "profile needs at least 3 matched (position, value) samples",
        ));
    }
    if profile.positions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("profile positions must be strictly increasing"));
    }
    match kind {
        ExtremumKind::Peak => {
            let (i_max, &max) = profile
                .values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            let min = profile.values.iter().cloned().fold(f64::INFINITY, f64::min);
            let level = 0.5 * (max + min);
            let left = (0..i_max)
                .rev()
                .find(|&i| profile.values[i] < level)
                .ok_or_else(|| Error::numerical("feature not resolved: no left half-max crossing"))?;
            let right = (i_max..n)
                .find(|&i| profile.values[i] < level)
                .ok_or_else(|| Error::numerical("feature not resolved: no right half-max crossing"))?;
            Ok(crossing(profile, right - 1, level) - crossing(profile, left, level))
        }
        ExtremumKind::Dip => {
            let mut crests = local_maxima(&profile.values);
            if crests.len() < 2 {
                return Err(Error::numerical(
                    "feature not resolved: a dip needs two flanking crests",
                ));
            }
            crests.sort_by(|&a, &b| profile.values[b].partial_cmp(&profile.values[a]).unwrap());
            let (i_l, i_r) = {
                let (a, b) = (crests[0], crests[1]);
                (a.min(b), a.max(b))
            };
            let i_min = (i_l..=i_r)
                .min_by(|&a, &b| profile.values[a].partial_cmp(&profile.values[b]).unwrap())
                .unwrap();
            let baseline = profile.values[i_l].min(profile.values[i_r]);
            let level = 0.5 * (baseline + profile.values[i_min]);
            let left = (i_l..i_min)
                .rev()
                .find(|&i| profile.values[i] > level)
                .ok_or_else(|| Error::numerical("feature not resolved: no left dip crossing"))?;
            let right = (i_min..=i_r)
                .find(|&i| profile.values[i] > level)
                .ok_or_else(|| Error::numerical("feature not resolved: no right dip crossing"))?;
            Ok(crossing(profile, right - 1, level) - crossing(profile, left, level))
        }
    }
}
