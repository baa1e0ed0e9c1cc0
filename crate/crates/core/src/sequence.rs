//! Pulse sequences: ordered illumination phases with the canonical confocal,
//! iCSD, rCSD, and GSD presets.
//!
//! A phase couples a beam shape to a rate model and a duration. Non-readout
//! phases only evolve the charge state; readout phases additionally
//! accumulate photons through a detection envelope (and, for the
//! ground-state-depletion variant, through a saturable fluorescence law).

use crate::charge::RateModel;
use crate::defaults;
use crate::error::{Error, Result};
use crate::optics::{BeamProfile, Polarization};

/// What a phase does to the simulation state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseRole {
    /// Prepares the charge state (no photons collected).
    Init,
    /// Spatially selective charge conversion (no photons collected).
    Deplete,
    /// Collects photons proportional to the local NV⁻ population.
    ReadoutCharge,
    /// Collects the spin-weighted signal; identical photon bookkeeping to
    /// [`PhaseRole::ReadoutCharge`], and anchors spin-trace weighting.
    ReadoutSpin,
}

impl PhaseRole {
    pub fn is_readout(&self) -> bool {
        matches!(self, PhaseRole::ReadoutCharge | PhaseRole::ReadoutSpin)
    }
}

/// One laser pulse of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub role: PhaseRole,
    /// Illumination profile; its `peak_intensity` is the phase power in mW.
    pub beam: BeamProfile,
    /// Intensity-to-rate law this phase drives charge conversion with.
    pub rate_model: RateModel,
    /// Pulse duration, μs.
    pub duration: f64,
    /// Detection point-spread envelope for readout phases (unit-peak shape;
    /// defaults to the standing-wave antinode of width ω_det).
    pub detection: Option<BeamProfile>,
    /// When set, photons are scored with the saturable fluorescence law
    /// S(I) = I/(I + i_sat) normalized at the beam peak, instead of being
    /// proportional to ρ₋ (ground-state-depletion readout).
    pub saturable_i_sat: Option<f64>,
}

impl Phase {
    fn validated(self) -> Result<Self> {
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::invalid(format!(
                "phase duration must be finite and >= 0 μs, got {}",
                self.duration
            )));
        }
        if let Some(i_sat) = self.saturable_i_sat {
            if !(i_sat > 0.0) || !i_sat.is_finite() {
                return Err(Error::invalid(format!(
                    "saturation power must be > 0 mW, got {i_sat}"
                )));
            }
        }
        Ok(self)
    }

    pub fn init(beam: BeamProfile, rate_model: RateModel, duration: f64) -> Result<Self> {
        Phase {
            role: PhaseRole::Init,
            beam,
            rate_model,
            duration,
            detection: None,
            saturable_i_sat: None,
        }
        .validated()
    }

    pub fn deplete(beam: BeamProfile, rate_model: RateModel, duration: f64) -> Result<Self> {
        Phase {
            role: PhaseRole::Deplete,
            beam,
            rate_model,
            duration,
            detection: None,
            saturable_i_sat: None,
        }
        .validated()
    }

    pub fn readout_charge(beam: BeamProfile, rate_model: RateModel, duration: f64) -> Result<Self> {
        Phase {
            role: PhaseRole::ReadoutCharge,
            beam,
            rate_model,
            duration,
            detection: None,
            saturable_i_sat: None,
        }
        .validated()
    }

    pub fn readout_spin(beam: BeamProfile, rate_model: RateModel, duration: f64) -> Result<Self> {
        Phase {
            role: PhaseRole::ReadoutSpin,
            beam,
            rate_model,
            duration,
            detection: None,
            saturable_i_sat: None,
        }
        .validated()
    }

    /// Overrides the detection envelope (readout phases only make use of it).
    pub fn with_detection(mut self, detection: BeamProfile) -> Self {
        self.detection = Some(detection);
        self
    }

    /// Switches the readout to the saturable-fluorescence law with the given
    /// saturation power (mW).
    pub fn with_saturable_fluorescence(mut self, i_sat: f64) -> Result<Self> {
        self.saturable_i_sat = Some(i_sat);
        self.validated()
    }

    /// Phase power in mW (the beam's peak intensity).
    pub fn power(&self) -> f64 {
        self.beam.peak_intensity
    }

    /// The unit-peak detection shape at radius `r` nm, falling back to the
    /// default standing-wave antinode of width ω_det.
    pub fn detection_shape(&self, r: f64) -> f64 {
        match &self.detection {
            Some(det) => det.shape_at_radius(r),
            None => BeamProfile::standing_cos2(defaults::OMEGA_NM, 1.0)
                .expect("default detection profile is valid")
                .shape_at_radius(r),
        }
    }
}

/// Canonical sequence families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Confocal,
    Icsd,
    Rcsd,
    Gsd,
    Custom,
}

/// An ordered phase list with at most one readout phase per repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub phases: Vec<Phase>,
    pub label: SequenceKind,
    /// Illumination polarization applied to every phase of the sequence.
    pub polarization: Polarization,
}

impl PulseSequence {
    pub fn new(phases: Vec<Phase>, label: SequenceKind) -> Result<Self> {
        let readouts = phases.iter().filter(|p| p.role.is_readout()).count();
        if readouts > 1 {
            return Err(Error::invalid(format!(
                "a sequence may contain at most one readout phase, got {readouts}"
            )));
        }
        Ok(PulseSequence {
            phases,
            label,
            polarization: Polarization::Circular,
        })
    }

    pub fn with_polarization(mut self, polarization: Polarization) -> Self {
        self.polarization = polarization;
        self
    }

    /// The readout phase, if the sequence has one.
    pub fn readout_phase(&self) -> Option<&Phase> {
        self.phases.iter().find(|p| p.role.is_readout())
    }
}

fn expect_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::invalid(format!(
            "{name} must list {want} per-phase values, got {got}"
        )));
    }
    Ok(())
}

/// Builds one of the canonical sequences. Empty `powers`/`durations`/
/// `widths` slices select the calibrated defaults; otherwise each slice must
/// carry one entry per phase (confocal/GSD: 1, iCSD/rCSD: 3, ordered
/// init, deplete, readout).
pub fn preset_sequence(
    kind: SequenceKind,
    powers: &[f64],
    durations: &[f64],
    widths: &[f64],
) -> Result<PulseSequence> {
    let (default_powers, default_durations): (&[f64], &[f64]) = match kind {
        SequenceKind::Icsd => (&[4.0, 34.0, 0.1], &[50.0, 40.0, 5.0]),
        SequenceKind::Rcsd => (&[0.68, 22.0, 0.1], &[5.0, 40.0, 5.0]),
        SequenceKind::Confocal => (&[0.1], &[5.0]),
        SequenceKind::Gsd => (&[34.0], &[5.0]),
        SequenceKind::Custom => {
            return Err(Error::invalid(
                "unknown preset kind: custom sequences are built phase by phase",
            ))
        }
    };
    let n = default_powers.len();
    let powers = if powers.is_empty() {
        default_powers
    } else {
        expect_len("powers", powers.len(), n)?;
        powers
    };
    let durations = if durations.is_empty() {
        default_durations
    } else {
        expect_len("durations", durations.len(), n)?;
        durations
    };
    let default_widths = vec![defaults::OMEGA_NM; n];
    let widths = if widths.is_empty() {
        &default_widths
    } else {
        expect_len("widths", widths.len(), n)?;
        widths
    };

    let phases = match kind {
        SequenceKind::Icsd => vec![
            Phase::init(
                BeamProfile::gaussian(widths[0], powers[0])?,
                RateModel::red_637(),
                durations[0],
            )?,
            Phase::deplete(
                BeamProfile::doughnut(widths[1], powers[1])?,
                RateModel::green_532(),
                durations[1],
            )?,
            Phase::readout_charge(
                BeamProfile::gaussian(widths[2], powers[2])?,
                RateModel::yellow_589(),
                durations[2],
            )?
            .with_detection(BeamProfile::standing_cos2(widths[2], 1.0)?),
        ],
        SequenceKind::Rcsd => vec![
            Phase::init(
                BeamProfile::gaussian(widths[0], powers[0])?,
                RateModel::green_532(),
                durations[0],
            )?,
            Phase::deplete(
                BeamProfile::doughnut(widths[1], powers[1])?,
                RateModel::red_637(),
                durations[1],
            )?,
            Phase::readout_charge(
                BeamProfile::gaussian(widths[2], powers[2])?,
                RateModel::yellow_589(),
                durations[2],
            )?
            .with_detection(BeamProfile::standing_cos2(widths[2], 1.0)?),
        ],
        SequenceKind::Confocal => vec![Phase::readout_charge(
            BeamProfile::gaussian(widths[0], powers[0])?,
            RateModel::green_532(),
            durations[0],
        )?
        .with_detection(BeamProfile::standing_cos2(widths[0], 1.0)?)],
        SequenceKind::Gsd => vec![Phase::readout_charge(
            BeamProfile::doughnut(widths[0], powers[0])?,
            RateModel::green_532(),
            durations[0],
        )?
        .with_detection(BeamProfile::standing_cos2(widths[0], 1.0)?)
        .with_saturable_fluorescence(defaults::I_SAT_FLUORESCENCE)?],
        SequenceKind::Custom => unreachable!(),
    };
    PulseSequence::new(phases, kind)
}
