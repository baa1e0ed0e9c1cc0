//! Raster-scan image formation: a pulse sequence evaluated per pixel over a
//! scene, with optional deterministic Poisson shot noise.
//!
//! The scan position moves the whole beam train; every NV sees each phase's
//! local intensity, converts charge accordingly, and the readout phase
//! collects photons through its detection envelope. Per-pixel noise draws
//! from an RNG substream derived from (seed, row, column) only, so images
//! are bit-identical across runs and across serial/parallel execution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::charge::{conversion_rate, evolve_charge, split_rates, IlluminationStep};
use crate::error::{Error, Result};
use crate::optics::beam_intensity;
use crate::scene::Scene;
use crate::sequence::PulseSequence;
use crate::spin::in_plane_angle_deg;

/// Rectangular scan raster. Pixel (row, col) sits at
/// `origin + (col·pitch, row·pitch)` in nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub origin: [f64; 2],
    pub pitch: f64,
    pub width: usize,
    pub height: usize,
}

impl ScanGrid {
    pub fn new(origin: [f64; 2], pitch: f64, width: usize, height: usize) -> Result<Self> {
        if !(pitch > 0.0) || !pitch.is_finite() {
            return Err(Error::invalid(format!(
                "scan pitch must be > 0 nm, got {pitch}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::invalid("scan grid must have at least one pixel"));
        }
        if !origin[0].is_finite() || !origin[1].is_finite() {
            return Err(Error::invalid("scan origin must be finite"));
        }
        Ok(ScanGrid {
            origin,
            pitch,
            width,
            height,
        })
    }

    /// Centered square raster: `pixels` × `pixels` around `center`.
    pub fn centered(center: [f64; 2], pitch: f64, pixels: usize) -> Result<Self> {
        let half = 0.5 * pitch * (pixels.saturating_sub(1)) as f64;
        ScanGrid::new([center[0] - half, center[1] - half], pitch, pixels, pixels)
    }

    pub fn pixel_position(&self, row: usize, col: usize) -> [f64; 2] {
        [
            self.origin[0] + col as f64 * self.pitch,
            self.origin[1] + row as f64 * self.pitch,
        ]
    }
}

/// A scanned image: expected counts (real-valued) or Poisson-sampled counts,
/// flagged by `sampled`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanImage {
    pub origin: [f64; 2],
    pub pitch: f64,
    pub width: usize,
    pub height: usize,
    /// Row-major pixel values, photons.
    pub values: Vec<f64>,
    /// True when values are integer shot-noise samples.
    pub sampled: bool,
}

impl ScanImage {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.width..(row + 1) * self.width]
    }
}

/// Everything [`run_sequence_at_point`] reports for one scan position.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    /// Per-NV ρ₋ entering the readout phase (after init/deplete phases); for
    /// sequences without a readout, the final state.
    pub rho_prepared: Vec<f64>,
    /// Per-NV ρ₋ after the full sequence (readout back-action included when
    /// its rate model is nonzero).
    pub rho_final: Vec<f64>,
    /// Per-NV expected readout photons.
    pub nv_counts: Vec<f64>,
    /// Scene-total expected photons including background.
    pub total_expected: f64,
}

/// Runs the sequence with every beam centered at `scan_pos` and returns the
/// per-NV charge trajectory endpoints and expected readout photons.
///
/// Non-readout phases only convert charge. A readout phase scores photons
/// from the state it receives, then applies its own (by default inert) rate
/// model — so a single green phase acts as readout and pump at once.
pub fn run_sequence_at_point(
    scene: &Scene,
    sequence: &PulseSequence,
    scan_pos: [f64; 2],
) -> PointOutcome {
    let n = scene.nvs.len();
    let mut rho_prepared = vec![0.0; n];
    let mut rho_final = vec![0.0; n];
    let mut nv_counts = vec![0.0; n];
    let mut background = 0.0;

    for (i, nv) in scene.nvs.iter().enumerate() {
        let pol = sequence
            .polarization
            .factor_for_axis_angle(in_plane_angle_deg(nv.axis_index));
        let rel = [nv.position[0] - scan_pos[0], nv.position[1] - scan_pos[1]];
        let mut state = nv.charge;
        let mut prepared: Option<f64> = None;

        for phase in &sequence.phases {
            let local = beam_intensity(&phase.beam, rel);
            if phase.role.is_readout() {
                let entering = state.rho_minus();
                prepared.get_or_insert(entering);
                let r_det = (rel[0] - phase.beam.center[0]).hypot(rel[1] - phase.beam.center[1]);
                let h_det = phase.detection_shape(r_det);
                let signal = match phase.saturable_i_sat {
                    Some(i_sat) => {
                        let s_ref = phase.power() / (phase.power() + i_sat);
                        if s_ref > 0.0 {
                            (local / (local + i_sat)) / s_ref
                        } else {
                            0.0
                        }
                    }
                    None => entering,
                };
                nv_counts[i] += nv.count_rate * phase.duration * h_det * signal;
            }
            let gamma = conversion_rate(&phase.rate_model, local)
                .expect("beam intensities are non-negative")
                * pol;
            let rates = split_rates(gamma, phase.rate_model.rho_st)
                .expect("rate model steady state is validated at construction");
            let step = IlluminationStep::new(rates, phase.duration)
                .expect("phase duration is validated at construction");
            state = evolve_charge(state, &step);
        }
        rho_final[i] = state.rho_minus();
        rho_prepared[i] = prepared.unwrap_or_else(|| state.rho_minus());
    }

    for phase in &sequence.phases {
        if phase.role.is_readout() {
            background += scene.background_rate * phase.duration;
        }
    }

    let total_expected = nv_counts.iter().sum::<f64>() + background;
    PointOutcome {
        rho_prepared,
        rho_final,
        nv_counts,
        total_expected,
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic RNG substream for one pixel, a function of (seed, row,
/// col) only — evaluation order never matters.
fn pixel_rng(seed: u64, row: u64, col: u64) -> ChaCha8Rng {
    let mut state = seed
        ^ row.wrapping_mul(0xA24B_AED4_963E_E407)
        ^ col.wrapping_mul(0x9FB2_1C65_1E98_DF25);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn sample_poisson(lambda: f64, rng: &mut ChaCha8Rng) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let dist = Poisson::new(lambda).expect("positive finite mean");
    dist.sample(rng).round()
}

/// Scans the scene with the sequence over `grid`. Without a seed, pixels
/// hold expected counts; with one, each pixel is Poisson-sampled from its
/// own substream, giving bit-identical images for identical inputs whether
/// rows are evaluated serially or in parallel.
pub fn simulate_scan(
    scene: &Scene,
    sequence: &PulseSequence,
    grid: &ScanGrid,
    noise_seed: Option<u64>,
) -> ScanImage {
    let mut values = vec![0.0; grid.width * grid.height];
    values
        .par_chunks_mut(grid.width)
        .enumerate()
        .for_each(|(row, out)| {
            for (col, v) in out.iter_mut().enumerate() {
                let pos = grid.pixel_position(row, col);
                let expected = run_sequence_at_point(scene, sequence, pos).total_expected;
                *v = match noise_seed {
                    None => expected,
                    Some(seed) => {
                        let mut rng = pixel_rng(seed, row as u64, col as u64);
                        sample_poisson(expected, &mut rng)
                    }
                };
            }
        });
    ScanImage {
        origin: grid.origin,
        pitch: grid.pitch,
        width: grid.width,
        height: grid.height,
        values,
        sampled: noise_seed.is_some(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charge::ChargeState;
    use crate::defaults;
    use crate::scene::NvCenter;
    use crate::sequence::{preset_sequence, SequenceKind};

    fn single_nv_scene() -> Scene {
        Scene::new(
            vec![NvCenter::new([0.0, 0.0], 0, defaults::COUNT_RATE_PER_US).unwrap()],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn empty_scene_scans_to_zero() {
        let scene = Scene::new(vec![], 0.0).unwrap();
        let seq = preset_sequence(SequenceKind::Confocal, &[], &[], &[]).unwrap();
        let grid = ScanGrid::centered([0.0, 0.0], 10.0, 9).unwrap();
        let img = simulate_scan(&scene, &seq, &grid, None);
        assert!(img.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn confocal_image_is_the_detection_envelope() {
        let scene = single_nv_scene();
        let seq = preset_sequence(SequenceKind::Confocal, &[], &[], &[]).unwrap();
        let grid = ScanGrid::centered([0.0, 0.0], 5.0, 61).unwrap();
        let img = simulate_scan(&scene, &seq, &grid, None);
        // Peak pixel: count_rate · duration · h_det(0) · ρ₋ = 50·5·1·0.75.
        let center = img.at(30, 30);
        assert!((center - 50.0 * 5.0 * 0.75).abs() < 1e-9);
        // 75 nm out the antinode halves.
        let half = img.at(30, 45);
        assert!((half - 0.5 * center).abs() < 1e-9 * center);
    }

    #[test]
    fn rcsd_doughnut_null_preserves_initialized_population() {
        let scene = single_nv_scene();
        let seq = preset_sequence(SequenceKind::Rcsd, &[], &[], &[]).unwrap();
        let out = run_sequence_at_point(&scene, &seq, [0.0, 0.0]);
        // On the null the deplete phase has zero rate: ρ stays at the green
        // steady state for any deplete duration.
        assert!((out.rho_prepared[0] - 0.75).abs() < 1e-9);
    }

    #[test]
    fn icsd_center_pixel_is_dark() {
        let scene = single_nv_scene();
        let seq = preset_sequence(SequenceKind::Icsd, &[], &[], &[]).unwrap();
        let out = run_sequence_at_point(&scene, &seq, [0.0, 0.0]);
        // Init (637 nm, 4 mW, 50 μs) parks ρ₋ near 5%; the doughnut null
        // does not reconvert it.
        assert!((out.rho_prepared[0] - defaults::RHO_ST_637).abs() < 1e-3);
        let off = run_sequence_at_point(&scene, &seq, [40.0, 0.0]);
        assert!(
            out.total_expected < off.total_expected,
            "center {} should be darker than 40 nm off ({})",
            out.total_expected,
            off.total_expected
        );
    }

    #[test]
    fn offset_nv_under_rcsd_depletes_toward_red_steady_state() {
        let mut scene = single_nv_scene();
        scene.nvs[0].charge = ChargeState::new(0.75).unwrap();
        let seq = preset_sequence(SequenceKind::Rcsd, &[], &[], &[]).unwrap();
        // 75 nm offset sits on the doughnut flank: strong depletion.
        let out = run_sequence_at_point(&scene, &seq, [-75.0, 0.0]);
        assert!((out.rho_prepared[0] - defaults::RHO_ST_637).abs() < 1e-3);
    }

    #[test]
    fn background_adds_per_readout_duration() {
        let scene = Scene::new(vec![], 2.0).unwrap();
        let seq = preset_sequence(SequenceKind::Rcsd, &[], &[], &[]).unwrap();
        let out = run_sequence_at_point(&scene, &seq, [0.0, 0.0]);
        // Readout lasts 5 μs: expect 10 background photons.
        assert!((out.total_expected - 10.0).abs() < 1e-12);
    }

    #[test]
    fn translation_covariance_is_exact() {
        let offset = [170.0, -230.0]; // integer nm keeps the arithmetic exact
        let seq = preset_sequence(SequenceKind::Rcsd, &[], &[], &[]).unwrap();
        let scene_a = Scene::new(
            vec![NvCenter::new([15.0, -10.0], 1, 50.0).unwrap()],
            0.0,
        )
        .unwrap();
        let scene_b = Scene::new(
            vec![NvCenter::new([15.0 + offset[0], -10.0 + offset[1]], 1, 50.0).unwrap()],
            0.0,
        )
        .unwrap();
        let grid_a = ScanGrid::new([-80.0, -80.0], 8.0, 21, 21).unwrap();
        let grid_b = ScanGrid::new(
            [-80.0 + offset[0], -80.0 + offset[1]],
            8.0,
            21,
            21,
        )
        .unwrap();
        let img_a = simulate_scan(&scene_a, &seq, &grid_a, None);
        let img_b = simulate_scan(&scene_b, &seq, &grid_b, None);
        assert_eq!(img_a.values, img_b.values);
    }

    #[test]
    fn noisy_scan_is_reproducible_and_integer() {
        let scene = single_nv_scene();
        let seq = preset_sequence(SequenceKind::Confocal, &[], &[], &[]).unwrap();
        let grid = ScanGrid::centered([0.0, 0.0], 20.0, 11).unwrap();
        let a = simulate_scan(&scene, &seq, &grid, Some(7));
        let b = simulate_scan(&scene, &seq, &grid, Some(7));
        assert_eq!(a.values, b.values);
        assert!(a.sampled);
        assert!(a.values.iter().all(|v| v.fract() == 0.0));
        let c = simulate_scan(&scene, &seq, &grid, Some(8));
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn serial_and_parallel_scans_agree_bitwise() {
        let scene = single_nv_scene();
        let seq = preset_sequence(SequenceKind::Icsd, &[], &[], &[]).unwrap();
        let grid = ScanGrid::centered([0.0, 0.0], 12.0, 17).unwrap();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_scan(&scene, &seq, &grid, Some(99)));
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| simulate_scan(&scene, &seq, &grid, Some(99)));
        assert_eq!(serial.values, parallel.values);
    }

    #[test]
    fn sample_mean_converges_to_expected_counts() {
        // χ² sanity at 3σ: mean of k Poisson draws at rate λ is within
        // 3·√(λ/k) of λ.
        let scene = single_nv_scene();
        let seq = preset_sequence(SequenceKind::Confocal, &[], &[], &[]).unwrap();
        let grid = ScanGrid::centered([0.0, 0.0], 30.0, 3).unwrap();
        let expected = simulate_scan(&scene, &seq, &grid, None);
        let k = 400;
        let mut sums = vec![0.0; expected.values.len()];
        for seed in 0..k {
            let img = simulate_scan(&scene, &seq, &grid, Some(seed));
            for (s, v) in sums.iter_mut().zip(&img.values) {
                *s += v;
            }
        }
        for (i, (&lam, &sum)) in expected.values.iter().zip(&sums).enumerate() {
            let mean = sum / k as f64;
            let sigma = (lam.max(1e-9) / k as f64).sqrt();
            assert!(
                (mean - lam).abs() <= 3.0 * sigma + 1e-9,
                "pixel {i}: mean {mean} vs λ {lam} (σ {sigma})"
            );
        }
    }

    #[test]
    fn polarization_selects_by_axis_angle() {
        use crate::optics::Polarization;
        // Two NVs on the doughnut flank with orthogonal in-plane dipoles:
        // linear polarization depletes the aligned one twice as fast.
        let nv_a = NvCenter::new([60.0, 0.0], 0, 50.0).unwrap(); // 45°
        let nv_b = NvCenter::new([-60.0, 0.0], 1, 50.0).unwrap(); // 135°
        let scene = Scene::new(vec![nv_a, nv_b], 0.0).unwrap();
        let seq = preset_sequence(SequenceKind::Rcsd, &[0.68, 10.0, 0.1], &[5.0, 2.0, 5.0], &[])
            .unwrap()
            .with_polarization(Polarization::linear(45.0));
        let out = run_sequence_at_point(&scene, &seq, [0.0, 0.0]);
        // Same |r| ⇒ same intensity; only the polarization factor differs.
        assert!(
            out.rho_prepared[0] < out.rho_prepared[1],
            "aligned NV should be depleted deeper: {:?}",
            out.rho_prepared
        );
    }
}
