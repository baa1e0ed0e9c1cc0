//! NV-emitter scenes: positions, crystal orientations, brightness, and the
//! per-emitter charge and spin state carried through a simulation.

use crate::charge::ChargeState;
use crate::error::{Error, Result};
use crate::spin::SpinParams;

/// A single NV center in the sample plane.
#[derive(Debug, Clone, PartialEq)]
pub struct NvCenter {
    /// Sample-plane position, nm.
    pub position: [f64; 2],
    /// Which of the four tetrahedral ⟨111⟩ orientations the symmetry axis
    /// takes (index into [`crate::spin::TETRAHEDRAL_AXES`]).
    pub axis_index: usize,
    /// Expected detected photons per μs at unit detection PSF and ρ₋ = 1.
    pub count_rate: f64,
    /// Current charge state (NV⁻ population).
    pub charge: ChargeState,
    /// Ground-state spin parameters used by ODMR/Rabi/Ramsey synthesis.
    pub spin: SpinParams,
}

impl NvCenter {
    /// Creates an NV with the default charge state (75% NV⁻, the green
    /// steady state) and default spin parameters.
    pub fn new(position: [f64; 2], axis_index: usize, count_rate: f64) -> Result<Self> {
        if !position[0].is_finite() || !position[1].is_finite() {
            return Err(Error::invalid("NV position must be finite"));
        }
        if axis_index > 3 {
            return Err(Error::invalid(format!(
                "axis index must be 0..=3, got {axis_index}"
            )));
        }
        if !(count_rate >= 0.0) || !count_rate.is_finite() {
            return Err(Error::invalid(format!(
                "count rate must be >= 0 per μs, got {count_rate}"
            )));
        }
        Ok(NvCenter {
            position,
            axis_index,
            count_rate,
            charge: ChargeState::new(crate::defaults::RHO_ST_532)?,
            spin: SpinParams::default(),
        })
    }

    pub fn with_charge(mut self, charge: ChargeState) -> Self {
        self.charge = charge;
        self
    }

    pub fn with_spin(mut self, spin: SpinParams) -> Self {
        self.spin = spin;
        self
    }
}

/// A set of NVs plus a flat background photon rate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub nvs: Vec<NvCenter>,
    /// Background photons per μs collected during any readout phase.
    pub background_rate: f64,
}

impl Scene {
    pub fn new(nvs: Vec<NvCenter>, background_rate: f64) -> Result<Self> {
        if !(background_rate >= 0.0) || !background_rate.is_finite() {
            return Err(Error::invalid(format!(
                "background rate must be >= 0 per μs, got {background_rate}"
            )));
        }
        Ok(Scene {
            nvs,
            background_rate,
        })
    }
}
