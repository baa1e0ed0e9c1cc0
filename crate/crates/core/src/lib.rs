//! Simulation and analysis toolkit for charge-state-depletion (CSD)
//! super-resolution microscopy of nitrogen-vacancy centers in diamond.
//!
//! The crate is organized in layers:
//!
//! * [`charge`] — two-level NV⁻/NV⁰ charge kinetics under illumination:
//!   intensity-dependent conversion rates and the closed-form population
//!   evolution they induce.
//! * [`optics`] — structured beam profiles (standing-wave fringes, doughnuts,
//!   Gaussian and ring modes), the depletion-sharpened effective point-spread
//!   function, and the resolution formulas that describe its width.
//! * [`scene`] / [`sequence`] / [`scan`] — NV ensembles, pulse sequences
//!   (initialize / deplete / read out), and raster-scan image formation with
//!   deterministic per-pixel shot noise.
//! * [`profile`] — line-profile extraction and full-width-at-half-maximum
//!   measurement for peaks and depletion dips.
//! * [`spin`] / [`magnetometry`] — ground-state spin resonances of the four
//!   NV orientations, ODMR / Rabi / Ramsey traces weighted by the prepared
//!   charge state, and vector-field inversion from measured splittings.
//! * [`analysis`] — least-squares fitting of decay curves, power laws, and
//!   resolution-versus-depletion scaling.
//! * [`io`] — plain-text artifact writers (PGM images, CSV curves).
//!
//! All lengths are nanometers, times microseconds, powers milliwatts,
//! frequencies GHz (fields in gauss) unless a name says otherwise.

// Validation deliberately writes `!(x > 0.0)` so NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod charge;
pub mod defaults;
pub mod error;
pub mod io;
pub mod magnetometry;
pub mod optics;
pub mod profile;
pub mod scan;
pub mod scene;
pub mod sequence;
pub mod spin;

pub use analysis::{
    fit_charge_decay, fit_power_exponent, fit_resolution_curve, FitParameter, FitResult,
    SweepVariable,
};
pub use charge::{ChargeState, IlluminationStep, RateModel};
pub use error::Error;
pub use magnetometry::{infer_field, FieldEstimate, TransitionPair};
pub use optics::{
    beam_intensity, beta_from_fwhm, effective_psf_value, numeric_fwhm, quartic_root_fwhm,
    resolution_eq6, BeamKind, BeamProfile, Polarization, ResolutionParams,
};
pub use profile::{extract_line_profile, fwhm_from_profile, ExtremumKind, LineProfile};
pub use scan::{simulate_scan, ScanGrid, ScanImage};
pub use scene::{NvCenter, Scene};
pub use sequence::{preset_sequence, Phase, PhaseRole, PulseSequence, SequenceKind};
pub use spin::{
    odmr_spectrum, rabi_trace, ramsey_trace, transition_frequencies, MagneticField, SpinParams,
    SpinTrace, TETRAHEDRAL_AXES,
};
