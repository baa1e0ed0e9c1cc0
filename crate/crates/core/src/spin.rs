//! NV⁻ ground-state spin physics: transition frequencies by exact 3×3
//! diagonalization, and charge-weighted ODMR / Rabi / Ramsey synthesis.
//!
//! The ground-state Hamiltonian in the NV frame is H = D·Sz² + γ_e·B·S.
//! Rotating the transverse field component onto x makes H real symmetric in
//! the |+1⟩, |0⟩, |−1⟩ basis, so a symmetric eigensolver returns exact level
//! energies; the two observable transitions are E₁−E₀ and E₂−E₀.
//!
//! Spin traces are weighted sums over the scene: each NV contributes in
//! proportion to its detection-envelope value times the NV⁻ population the
//! charge sequence prepared — an NV pushed to NV⁰ contributes nothing.

use nalgebra::Matrix3;

use crate::defaults;
use crate::error::{Error, Result};
use crate::scan::run_sequence_at_point;
use crate::scene::Scene;
use crate::sequence::PulseSequence;

/// The four ⟨111⟩ NV symmetry axes of a ⟨100⟩-cut crystal: normalized
/// (±1,±1,±1) directions with an even number of minus signs.
pub const TETRAHEDRAL_AXES: [[f64; 3]; 4] = {
    const S: f64 = 0.577_350_269_189_625_8; // 1/√3
    [
        [S, S, S],
        [S, -S, -S],
        [-S, S, -S],
        [-S, -S, S],
    ]
};

/// In-plane (xy) angle of an NV axis in degrees, folded to [0°, 180°).
/// Axes 0 and 3 project to 45°, axes 1 and 2 to 135°.
pub fn in_plane_angle_deg(axis_index: usize) -> f64 {
    let axis = TETRAHEDRAL_AXES[axis_index];
    let mut deg = axis[1].atan2(axis[0]).to_degrees();
    while deg < 0.0 {
        deg += 180.0;
    }
    while deg >= 180.0 {
        deg -= 180.0;
    }
    deg
}

/// A static magnetic field in the lab (crystal) frame, gauss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticField {
    pub vector: [f64; 3],
}

impl MagneticField {
    pub fn new(vector: [f64; 3]) -> Result<Self> {
        if vector.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("magnetic field components must be finite"));
        }
        Ok(MagneticField { vector })
    }

    pub fn magnitude(&self) -> f64 {
        let [x, y, z] = self.vector;
        (x * x + y * y + z * z).sqrt()
    }

    /// Angle between the field and the given NV axis, degrees, folded into
    /// [0°, 90°] (the spectra cannot distinguish ±axis).
    pub fn angle_to_axis_deg(&self, axis_index: usize) -> f64 {
        let b = self.magnitude();
        if b == 0.0 {
            return 0.0;
        }
        let axis = TETRAHEDRAL_AXES[axis_index];
        let dot = self.vector[0] * axis[0] + self.vector[1] * axis[1] + self.vector[2] * axis[2];
        (dot.abs() / b).clamp(0.0, 1.0).acos().to_degrees()
    }
}

/// Ground-state spin constants of one NV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams {
    /// Zero-field splitting D, GHz.
    pub zfs_d: f64,
    /// Gyromagnetic ratio γ_e, MHz per gauss.
    pub gyro: f64,
    /// ODMR Lorentzian full width at half maximum, MHz.
    pub linewidth: f64,
    /// Maximum fluorescence dip depth, in [0, 1].
    pub contrast: f64,
    /// Inhomogeneous dephasing time T₂*, μs.
    pub t2_star: f64,
    /// Per-NV Rabi-frequency scale: Ω_NV = drive · this (dimensionless 1
    /// means the NV oscillates exactly at the requested drive frequency).
    pub rabi_freq_at_unit_drive: f64,
    /// Rabi envelope decay time, μs.
    pub rabi_decay: f64,
}

impl Default for SpinParams {
    fn default() -> Self {
        SpinParams {
            zfs_d: defaults::ZERO_FIELD_SPLITTING_GHZ,
            gyro: defaults::GYROMAGNETIC_MHZ_PER_G,
            linewidth: defaults::ODMR_LINEWIDTH_MHZ,
            contrast: defaults::SPIN_CONTRAST,
            t2_star: defaults::T2_STAR_US,
            rabi_freq_at_unit_drive: 1.0,
            rabi_decay: defaults::RABI_DECAY_US,
        }
    }
}

impl SpinParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.zfs_d > 0.0) {
            return Err(Error::invalid("zero-field splitting must be > 0 GHz"));
        }
        if !(self.gyro > 0.0) {
            return Err(Error::invalid("gyromagnetic ratio must be > 0 MHz/G"));
        }
        if !(self.linewidth > 0.0) {
            return Err(Error::invalid("linewidth must be > 0 MHz"));
        }
        if !(0.0..=1.0).contains(&self.contrast) {
            return Err(Error::invalid("contrast must lie in [0, 1]"));
        }
        if !(self.t2_star > 0.0) {
            return Err(Error::invalid("T2* must be > 0 μs"));
        }
        Ok(())
    }
}

/// Spin-transition frequencies (ω₋, ω₊) in GHz of the NV with the given
/// axis under `field`, by exact diagonalization of the 3×3 ground-state
/// Hamiltonian. Always ω₋ ≤ ω₊.
pub fn transition_frequencies(
    field: &MagneticField,
    axis_index: usize,
    params: &SpinParams,
) -> (f64, f64) {
    let energies = level_energies(field, axis_index, params);
    (energies[1] - energies[0], energies[2] - energies[0])
}

/// Sorted eigenvalues (E₀ ≤ E₁ ≤ E₂, GHz) of the ground-state Hamiltonian.
fn level_energies(field: &MagneticField, axis_index: usize, params: &SpinParams) -> [f64; 3] {
    let mut e: Vec<f64> = hamiltonian(field, axis_index, params)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    [e[0], e[1], e[2]]
}

/// H = D·Sz² + γ_e(b∥·Sz + b⊥·Sx) in GHz, basis |+1⟩, |0⟩, |−1⟩, with the
/// transverse field rotated onto x (the spectrum is azimuth-independent).
fn hamiltonian(field: &MagneticField, axis_index: usize, params: &SpinParams) -> Matrix3<f64> {
    let axis = TETRAHEDRAL_AXES[axis_index];
    let b = field.vector;
    let b_par = b[0] * axis[0] + b[1] * axis[1] + b[2] * axis[2];
    let b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    let b_perp = (b2 - b_par * b_par).max(0.0).sqrt();
    let g_par = params.gyro * 1e-3 * b_par; // GHz
    let g_perp = params.gyro * 1e-3 * b_perp;
    let d = params.zfs_d;
    let off = g_perp / std::f64::consts::SQRT_2;
    Matrix3::new(
        d + g_par, off, 0.0, //
        off, 0.0, off, //
        0.0, off, d - g_par,
    )
}

/// An ODMR spectrum, Rabi trace, or Ramsey trace: strictly increasing
/// abscissa (MHz for spectra, μs for time traces) with normalized
/// fluorescence values.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinTrace {
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
}

/// Detection-weighted charge preparation: per-NV weights proportional to
/// h_det(nv − scan_pos)·ρ₋(prepared), normalized to sum to one (all-zero
/// weights stay zero and the trace is flat at 1).
fn selection_weights(scene: &Scene, sequence: &PulseSequence, scan_pos: [f64; 2]) -> Vec<f64> {
    let outcome = run_sequence_at_point(scene, sequence, scan_pos);
    let mut weights: Vec<f64> = scene
        .nvs
        .iter()
        .zip(&outcome.rho_prepared)
        .map(|(nv, &rho)| {
            let rel = [nv.position[0] - scan_pos[0], nv.position[1] - scan_pos[1]];
            let h = match sequence.readout_phase() {
                Some(phase) => {
                    let r = (rel[0] - phase.beam.center[0]).hypot(rel[1] - phase.beam.center[1]);
                    phase.detection_shape(r)
                }
                None => 1.0,
            };
            h * rho
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        for w in &mut weights {
            *w /= total;
        }
    }
    weights
}

fn require_increasing(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::invalid(format!("{name} list must not be empty")));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "{name} list must be strictly increasing"
        )));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("{name} values must be finite")));
    }
    Ok(())
}

/// Unit-peak Lorentzian centered at `f0` with FWHM `w` (all MHz).
fn lorentzian(f: f64, f0: f64, w: f64) -> f64 {
    let half = 0.5 * w;
    half * half / ((f - f0) * (f - f0) + half * half)
}

/// CSD-selective ODMR spectrum at `scan_pos`: the charge sequence prepares
/// per-NV ρ₋, and each NV's two transitions dip the normalized fluorescence
/// by its weight times its contrast.
///
/// Abscissa is reported in MHz; `mw_freqs` are given in GHz.
pub fn odmr_spectrum(
    scene: &Scene,
    sequence: &PulseSequence,
    mw_freqs_ghz: &[f64],
    scan_pos: [f64; 2],
    field: &MagneticField,
) -> Result<SpinTrace> {
    require_increasing("microwave frequency", mw_freqs_ghz)?;
    let weights = selection_weights(scene, sequence, scan_pos);
    let lines: Vec<(f64, f64, f64, f64)> = scene
        .nvs
        .iter()
        .zip(&weights)
        .map(|(nv, &w)| {
            let (lo, hi) = transition_frequencies(field, nv.axis_index, &nv.spin);
            (lo * 1e3, hi * 1e3, w * nv.spin.contrast, nv.spin.linewidth)
        })
        .collect();
    let values = mw_freqs_ghz
        .iter()
        .map(|&f_ghz| {
            let f = f_ghz * 1e3;
            let dip: f64 = lines
                .iter()
                .map(|&(lo, hi, depth, width)| {
                    depth * (lorentzian(f, lo, width) + lorentzian(f, hi, width))
                })
                .sum();
            1.0 - dip
        })
        .collect();
    Ok(SpinTrace {
        abscissa: mw_freqs_ghz.iter().map(|f| f * 1e3).collect(),
        values,
    })
}

/// Distance (MHz) from the microwave carrier to the nearest of the NV's two
/// transitions.
fn detuning_mhz(
    field: &MagneticField,
    axis_index: usize,
    params: &SpinParams,
    mw_freq_ghz: f64,
) -> f64 {
    let (lo, hi) = transition_frequencies(field, axis_index, params);
    let d_lo = (mw_freq_ghz - lo).abs();
    let d_hi = (mw_freq_ghz - hi).abs();
    d_lo.min(d_hi) * 1e3
}

/// Charge-selective Rabi trace: each NV oscillates at its effective Rabi
/// frequency √(Ω²+δ²) with amplitude suppressed by Ω²/(Ω²+δ²), under a
/// decaying envelope.
pub fn rabi_trace(
    scene: &Scene,
    sequence: &PulseSequence,
    drive_mhz: f64,
    mw_freq_ghz: f64,
    times_us: &[f64],
    scan_pos: [f64; 2],
    field: &MagneticField,
) -> Result<SpinTrace> {
    require_increasing("time", times_us)?;
    if times_us[0] < 0.0 {
        return Err(Error::invalid("times must be >= 0 μs"));
    }
    if !(drive_mhz >= 0.0) || !drive_mhz.is_finite() {
        return Err(Error::invalid(format!(
            "drive frequency must be >= 0 MHz, got {drive_mhz}"
        )));
    }
    let weights = selection_weights(scene, sequence, scan_pos);
    let components: Vec<(f64, f64, f64, f64)> = scene
        .nvs
        .iter()
        .zip(&weights)
        .map(|(nv, &w)| {
            let omega = drive_mhz * nv.spin.rabi_freq_at_unit_drive;
            let delta = detuning_mhz(field, nv.axis_index, &nv.spin, mw_freq_ghz);
            let omega2 = omega * omega;
            let eff = (omega2 + delta * delta).sqrt();
            let amp = if omega2 + delta * delta > 0.0 {
                omega2 / (omega2 + delta * delta)
            } else {
                0.0
            };
            (w * nv.spin.contrast * amp, eff, nv.spin.rabi_decay, 0.0)
        })
        .collect();
    let values = times_us
        .iter()
        .map(|&t| {
            let dip: f64 = components
                .iter()
                .map(|&(depth, eff, decay, _)| {
                    let s = (std::f64::consts::PI * eff * t).sin();
                    depth * s * s * (-t / decay).exp()
                })
                .sum();
            1.0 - dip
        })
        .collect();
    Ok(SpinTrace {
        abscissa: times_us.to_vec(),
        values,
    })
}

/// Charge-selective Ramsey trace: fringes at the detuning δ under a
/// Gaussian T₂* envelope.
pub fn ramsey_trace(
    scene: &Scene,
    sequence: &PulseSequence,
    detuning_mhz: f64,
    taus_us: &[f64],
    scan_pos: [f64; 2],
) -> Result<SpinTrace> {
    require_increasing("tau", taus_us)?;
    if taus_us[0] < 0.0 {
        return Err(Error::invalid("taus must be >= 0 μs"));
    }
    let weights = selection_weights(scene, sequence, scan_pos);
    let components: Vec<(f64, f64)> = scene
        .nvs
        .iter()
        .zip(&weights)
        .map(|(nv, &w)| (w * nv.spin.contrast, nv.spin.t2_star))
        .collect();
    let values = taus_us
        .iter()
        .map(|&tau| {
            let dip: f64 = components
                .iter()
                .map(|&(depth, t2)| {
                    let envelope = (-(tau / t2) * (tau / t2)).exp();
                    let fringe = (2.0 * std::f64::consts::PI * detuning_mhz * tau).cos();
                    0.5 * depth * (1.0 - fringe * envelope)
                })
                .sum();
            1.0 - dip
        })
        .collect();
    Ok(SpinTrace {
        abscissa: taus_us.to_vec(),
        values,
    })
}

/// Axis helper used by tests and the field-inversion seeds: ω± of a field of
/// magnitude `b` gauss at angle `theta_deg` to the axis.
pub fn frequencies_at_angle(b: f64, theta_deg: f64, params: &SpinParams) -> (f64, f64) {
    let theta = theta_deg.to_radians();
    // Only the axial/transverse decomposition matters; azimuth is irrelevant.
    let b_par = b * theta.cos();
    let b_perp = (b * b - b_par * b_par).max(0.0).sqrt();
    let g_par = params.gyro * 1e-3 * b_par;
    let g_perp = params.gyro * 1e-3 * b_perp;
    let d = params.zfs_d;
    let off = g_perp / std::f64::consts::SQRT_2;
    let h = Matrix3::new(
        d + g_par, off, 0.0, //
        off, 0.0, off, //
        0.0, off, d - g_par,
    );
    let mut e: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (e[1] - e[0], e[2] - e[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::NvCenter;
    use crate::sequence::{preset_sequence, SequenceKind};
    use proptest::prelude::*;

    fn params() -> SpinParams {
        SpinParams::default()
    }

    #[test]
    fn tetrahedral_axes_are_unit_and_maximally_spread() {
        for (i, a) in TETRAHEDRAL_AXES.iter().enumerate() {
            let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            for b in TETRAHEDRAL_AXES.iter().skip(i + 1) {
                let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                assert!((dot + 1.0 / 3.0).abs() < 1e-12, "pairwise cos must be −1/3");
            }
        }
        assert_eq!(in_plane_angle_deg(0), 45.0);
        assert_eq!(in_plane_angle_deg(1), 135.0);
        assert_eq!(in_plane_angle_deg(2), 135.0);
        assert_eq!(in_plane_angle_deg(3), 45.0);
    }

    #[test]
    fn zero_field_is_degenerate_at_d() {
        let f = MagneticField::new([0.0, 0.0, 0.0]).unwrap();
        for axis in 0..4 {
            let (lo, hi) = transition_frequencies(&f, axis, &params());
            assert!((lo - 2.870).abs() < 1e-12);
            assert!((hi - 2.870).abs() < 1e-12);
        }
    }

    #[test]
    fn axial_field_splits_linearly() {
        let b = 30.0;
        let axis = TETRAHEDRAL_AXES[2];
        let f = MagneticField::new([b * axis[0], b * axis[1], b * axis[2]]).unwrap();
        let (lo, hi) = transition_frequencies(&f, 2, &params());
        let zeeman = params().gyro * 1e-3 * b;
        assert!((lo - (2.870 - zeeman)).abs() < 1e-12 * 2.870);
        assert!((hi - (2.870 + zeeman)).abs() < 1e-12 * 2.870);
        assert!(((hi - lo) - 2.0 * zeeman).abs() < 1e-12);
    }

    #[test]
    fn oblique_field_reproduces_frozen_diagonalization() {
        // 25.5 G at 60° to the axis: frozen exact-diagonalization values.
        let (lo, hi) = frequencies_at_angle(25.5, 60.0, &params());
        assert!((lo - 2.836271).abs() < 1e-5, "lo = {lo}");
        assert!((hi - 2.907731).abs() < 1e-5, "hi = {hi}");
        let split_mhz = (hi - lo) * 1e3;
        assert!((split_mhz - 71.0).abs() < 1.0, "split = {split_mhz} MHz");
    }

    #[test]
    fn eigenpairs_satisfy_the_hamiltonian() {
        let fields = [
            [3.0, -14.0, 22.0],
            [0.0, 0.0, 55.0],
            [-40.0, 13.0, -9.0],
            [1e-3, 2e-3, -1e-3],
        ];
        for v in fields {
            let field = MagneticField::new(v).unwrap();
            for axis in 0..4 {
                let h = hamiltonian(&field, axis, &params());
                let eig = h.symmetric_eigen();
                let h_norm = h.norm();
                for k in 0..3 {
                    let lambda = eig.eigenvalues[k];
                    let vec = eig.eigenvectors.column(k);
                    let residual = (h * vec - lambda * vec).norm();
                    assert!(
                        residual <= 1e-10 * h_norm,
                        "eigen residual {residual} vs ‖H‖ {h_norm}"
                    );
                }
                // γ·B terms are traceless: the eigenvalue sum is 2D.
                let sum: f64 = eig.eigenvalues.iter().sum();
                assert!((sum - 2.0 * params().zfs_d).abs() <= 1e-10 * 2.0 * params().zfs_d);
            }
        }
    }

    fn two_nv_scene() -> Scene {
        let a = NvCenter::new([0.0, 0.0], 0, 50.0).unwrap();
        let b = NvCenter::new([100.0, 0.0], 1, 50.0).unwrap();
        Scene::new(vec![a, b], 0.0).unwrap()
    }

    #[test]
    fn off_resonance_spectrum_is_flat_at_one() {
        let scene = Scene::new(vec![NvCenter::new([0.0, 0.0], 0, 50.0).unwrap()], 0.0).unwrap();
        let seq = preset_sequence(SequenceKind::Confocal, &[], &[], &[]).unwrap();
        let field = MagneticField::new([5.0, 7.0, 9.0]).unwrap();
        let trace = odmr_spectrum(&scene, &seq, &[1.0, 1.001], [0.0, 0.0], &field).unwrap();
        // 1.9 GHz from resonance with an 8 MHz line: dips < 1e-4·contrast.
        for v in trace.values {
            assert!((v - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn confocal_odmr_shows_all_four_dips() {
        let scene = two_nv_scene();
        let seq = preset_sequence(SequenceKind::Confocal, &[], &[], &[]).unwrap();
        // Field oblique to both axes: four distinct lines.
        let field = MagneticField::new([18.0, 7.0, -12.0]).unwrap();
        let freqs: Vec<f64> = (0..1601).map(|k| 2.70 + 0.34 * k as f64 / 1600.0).collect();
        let trace = odmr_spectrum(&scene, &seq, &freqs, [50.0, 0.0], &field).unwrap();
        let dips = count_local_minima_below(&trace.values, 0.995);
        assert_eq!(dips, 4, "expected four resolvable dips");
    }

    #[test]
    fn rcsd_odmr_keeps_only_the_selected_nv() {
        let scene = two_nv_scene();
        let seq = preset_sequence(SequenceKind::Rcsd, &[], &[], &[]).unwrap();
        let field = MagneticField::new([18.0, 7.0, -12.0]).unwrap();
        let freqs: Vec<f64> = (0..1601).map(|k| 2.70 + 0.34 * k as f64 / 1600.0).collect();
        let trace = odmr_spectrum(&scene, &seq, &freqs, [0.0, 0.0], &field).unwrap();
        let dips = count_local_minima_below(&trace.values, 0.995);
        assert_eq!(dips, 2, "only the centered NV's pair should survive");
    }

    fn count_local_minima_below(values: &[f64], threshold: f64) -> usize {
        values
            .windows(3)
            .filter(|w| w[1] < w[0] && w[1] <= w[2] && w[1] < threshold)
            .count()
    }

    #[test]
    fn rabi_trace_starts_at_one_and_dips_at_half_period() {
        let scene = Scene::new(vec![NvCenter::new([0.0, 0.0], 0, 50.0).unwrap()], 0.0).unwrap();
        let mut scene = scene;
        scene.nvs[0].spin.rabi_decay = 1e9; // effectively undamped
        let seq = preset_sequence(SequenceKind::Confocal, &[], &[], &[]).unwrap();
        let field = MagneticField::new([0.0, 0.0, 0.0]).unwrap();
        let omega = 5.0; // MHz
        let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.001).collect();
        let trace = rabi_trace(
            &scene,
            &seq,
            omega,
            2.870,
            &times,
            [0.0, 0.0],
            &field,
        )
        .unwrap();
        assert!((trace.values[0] - 1.0).abs() < 1e-12);
        let min_idx = trace
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let expected = 1.0 / (2.0 * omega);
        assert!(
            (times[min_idx] - expected).abs() <= 0.002,
            "first minimum at {} vs 1/(2Ω) = {}",
            times[min_idx],
            expected
        );
    }

    #[test]
    fn ramsey_fringe_period_and_envelope() {
        let scene = Scene::new(vec![NvCenter::new([0.0, 0.0], 0, 50.0).unwrap()], 0.0).unwrap();
        let seq = preset_sequence(SequenceKind::Confocal, &[], &[], &[]).unwrap();
        let delta = 2.0; // MHz → fringe period 0.5 μs
        let taus: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.001).collect();
        let trace = ramsey_trace(&scene, &seq, delta, &taus, [0.0, 0.0]).unwrap();
        assert!((trace.values[0] - 1.0).abs() < 1e-12);

        // Successive fluorescence maxima (cos = +1) sit 1/δ apart.
        let mut peaks = vec![];
        for (i, w) in trace.values.windows(3).enumerate() {
            if w[1] > w[0] && w[1] >= w[2] {
                peaks.push(taus[i + 1]);
            }
        }
        assert!(peaks.len() >= 3);
        let gap = peaks[1] - peaks[0];
        assert!((gap - 0.5).abs() < 0.01, "fringe gap {gap} vs 0.5 μs");

        // Envelope: fringe amplitude at τ = T₂* is e^{−1} of the initial one.
        let t2 = scene.nvs[0].spin.t2_star;
        let amp_at = |tau: f64| {
            let i = (tau / 0.001).round() as usize;
            // Compare the fringe term directly: depth at cos peak vs trough
            // around this τ is 2·(c/2)·e^{−(τ/T₂*)²}; sample a half period.
            let half = (0.25 / delta / 0.001).round() as usize;
            (trace.values[i] - trace.values[i + half]).abs()
        };
        let ratio = amp_at(t2) / amp_at(0.0);
        assert!(
            (ratio - (-1.0f64).exp()).abs() < 0.05,
            "envelope ratio {ratio}"
        );
    }

    #[test]
    fn zero_population_means_no_spin_signal() {
        use crate::charge::ChargeState;
        let mut scene = two_nv_scene();
        for nv in &mut scene.nvs {
            nv.charge = ChargeState::new(0.0).unwrap();
        }
        // Sequence with no charge pumping at all: a bare yellow readout.
        let seq = PulseSequence::new(
            vec![crate::sequence::Phase::readout_charge(
                crate::optics::BeamProfile::gaussian(300.0, 0.1).unwrap(),
                crate::charge::RateModel::yellow_589(),
                5.0,
            )
            .unwrap()],
            SequenceKind::Custom,
        )
        .unwrap();
        let field = MagneticField::new([10.0, 0.0, 5.0]).unwrap();
        let freqs: Vec<f64> = (0..200).map(|k| 2.80 + 0.001 * k as f64).collect();
        let trace = odmr_spectrum(&scene, &seq, &freqs, [0.0, 0.0], &field).unwrap();
        assert!(trace.values.iter().all(|&v| v == 1.0));
    }

    proptest! {
        #[test]
        fn transitions_are_ordered_and_continuous_to_zero_field(
            bx in -60.0..60.0f64,
            by in -60.0..60.0f64,
            bz in -60.0..60.0f64,
            axis in 0usize..4,
            scale in 1e-4..1.0f64,
        ) {
            let p = params();
            let f = MagneticField::new([bx * scale, by * scale, bz * scale]).unwrap();
            let (lo, hi) = transition_frequencies(&f, axis, &p);
            prop_assert!(hi >= lo);
            // Shrinking the field pulls both transitions toward D.
            let f_small = MagneticField::new([
                bx * scale * 1e-3,
                by * scale * 1e-3,
                bz * scale * 1e-3,
            ]).unwrap();
            let (lo2, hi2) = transition_frequencies(&f_small, axis, &p);
            prop_assert!((lo2 - p.zfs_d).abs() <= (lo - p.zfs_d).abs() + 1e-12);
            prop_assert!((hi2 - p.zfs_d).abs() <= (hi - p.zfs_d).abs() + 1e-12);
        }

        #[test]
        fn spin_signals_stay_in_band(
            fx in -40.0..40.0f64,
            fz in -40.0..40.0f64,
        ) {
            let scene = two_nv_scene();
            let seq = preset_sequence(SequenceKind::Confocal, &[], &[], &[]).unwrap();
            let field = MagneticField::new([fx, 3.0, fz]).unwrap();
            let freqs: Vec<f64> = (0..120).map(|k| 2.70 + 0.003 * k as f64).collect();
            let trace = odmr_spectrum(&scene, &seq, &freqs, [40.0, 0.0], &field).unwrap();
            let max_contrast = scene.nvs.iter().map(|nv| nv.spin.contrast).fold(0.0, f64::max);
            for v in trace.values {
                prop_assert!(v <= 1.0 + 1e-12);
                // Weights are normalized, so dips cannot exceed ~2× the
                // largest contrast even where both lines of an NV overlap.
                prop_assert!(v >= 1.0 - 2.0 * max_contrast - 1e-12);
            }
        }
    }
}
