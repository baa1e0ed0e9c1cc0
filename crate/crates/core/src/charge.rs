//! Two-state NV⁻/NV⁰ charge kinetics under laser illumination.
//!
//! A single illuminated NV hops between its negative and neutral charge
//! states with intensity-dependent recharging rate γ_r and ionization rate
//! γ_i. The NV⁻ population ρ₋ then obeys
//!
//! ```text
//! dρ₋/dτ = γ_r·(1 − ρ₋) − γ_i·ρ₋
//! ```
//!
//! whose solution is an exponential relaxation toward the steady state
//! ρ_st = γ_r/(γ_r+γ_i) at total rate γ = γ_r+γ_i. [`evolve_charge`]
//! implements that closed form; [`RateModel`] maps laser intensity to the
//! total rate via a two-photon law with an optional saturation crossover.

use crate::defaults;
use crate::error::{Error, Result};

/// NV charge population with a single stored degree of freedom: the NV⁻
/// fraction ρ₋. The neutral fraction is implied as 1 − ρ₋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeState {
    rho_minus: f64,
}

impl ChargeState {
    /// Creates a state with NV⁻ population `rho_minus` ∈ [0, 1].
    pub fn new(rho_minus: f64) -> Result<Self> {
        if !rho_minus.is_finite() || !(0.0..=1.0).contains(&rho_minus) {
            return Err(Error::invalid(format!(
                "NV- population must lie in [0, 1], got {rho_minus}"
            )));
        }
        Ok(ChargeState { rho_minus })
    }

    /// NV⁻ population ρ₋.
    pub fn rho_minus(&self) -> f64 {
        self.rho_minus
    }

    /// NV⁰ population ρ₀ = 1 − ρ₋.
    pub fn rho_zero(&self) -> f64 {
        1.0 - self.rho_minus
    }
}

/// Recharging and ionization rates, each per μs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCoefficients {
    pub gamma_r: f64,
    pub gamma_i: f64,
}

impl RateCoefficients {
    pub fn new(gamma_r: f64, gamma_i: f64) -> Result<Self> {
        if !(gamma_r >= 0.0 && gamma_i >= 0.0) || !gamma_r.is_finite() || !gamma_i.is_finite() {
            return Err(Error::invalid(format!(
                "rates must be finite and non-negative, got gamma_r={gamma_r}, gamma_i={gamma_i}"
            )));
        }
        Ok(RateCoefficients { gamma_r, gamma_i })
    }

    /// Total conversion rate γ = γ_r + γ_i, per μs.
    pub fn total(&self) -> f64 {
        self.gamma_r + self.gamma_i
    }
}

/// Laser wavelengths the charge model distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wavelength {
    /// 532 nm pump (ionizes NV⁰ ⇌ NV⁻ toward a 75% NV⁻ steady state).
    Nm532,
    /// 589 nm readout (charge-neutral by default).
    Nm589,
    /// 637 nm depletion (pumps toward a 5% NV⁻ steady state).
    Nm637,
}

impl Wavelength {
    pub fn nanometers(&self) -> u32 {
        match self {
            Wavelength::Nm532 => 532,
            Wavelength::Nm589 => 589,
            Wavelength::Nm637 => 637,
        }
    }
}

/// Intensity dependence of the total conversion rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRegime {
    /// rate(I) = α·I², valid well below saturation.
    PureQuadratic,
    /// rate(I) = α·I²/(1 + I/i_sat): quadratic for I ≪ i_sat, linear for
    /// I ≫ i_sat.
    Saturating,
}

/// Maps laser intensity (mW) to a total charge conversion rate (per μs) and
/// carries the steady-state NV⁻ population the illumination drives toward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    pub wavelength: Wavelength,
    /// Two-photon coefficient α, per μs per mW².
    pub alpha: f64,
    /// Saturation power, mW (used only in the saturating regime).
    pub i_sat: f64,
    /// Steady-state NV⁻ population under this wavelength.
    pub rho_st: f64,
    pub regime: RateRegime,
    /// Dimensionless rate multiplier ≥ 0 capturing the relative two-photon
    /// efficiency of the illumination polarization (1 = circular).
    pub polarization_factor: f64,
}

impl RateModel {
    pub fn new(
        wavelength: Wavelength,
        alpha: f64,
        i_sat: f64,
        rho_st: f64,
        regime: RateRegime,
    ) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be >= 0, got {alpha}")));
        }
        if !(i_sat > 0.0) {
            return Err(Error::invalid(format!("i_sat must be > 0, got {i_sat}")));
        }
        if !(0.0..=1.0).contains(&rho_st) {
            return Err(Error::invalid(format!(
                "steady-state population must lie in [0, 1], got {rho_st}"
            )));
        }
        Ok(RateModel {
            wavelength,
            alpha,
            i_sat,
            rho_st,
            regime,
            polarization_factor: 1.0,
        })
    }

    /// Default 532 nm pump model (pure-quadratic).
    pub fn green_532() -> Self {
        RateModel::new(
            Wavelength::Nm532,
            defaults::ALPHA_532,
            defaults::I_SAT_532,
            defaults::RHO_ST_532,
            RateRegime::PureQuadratic,
        )
        .expect("default 532 nm model parameters are valid")
    }

    /// Default 637 nm depletion model (pure-quadratic).
    pub fn red_637() -> Self {
        RateModel::new(
            Wavelength::Nm637,
            defaults::ALPHA_637,
            defaults::I_SAT_637,
            defaults::RHO_ST_637,
            RateRegime::PureQuadratic,
        )
        .expect("default 637 nm model parameters are valid")
    }

    /// Default 589 nm readout model: zero conversion rate, so readout leaves
    /// the charge state untouched.
    pub fn yellow_589() -> Self {
        RateModel::new(
            Wavelength::Nm589,
            defaults::ALPHA_589,
            defaults::I_SAT_589,
            defaults::RHO_ST_589,
            RateRegime::PureQuadratic,
        )
        .expect("default 589 nm model parameters are valid")
    }

    /// Returns the model with a different polarization multiplier.
    pub fn with_polarization_factor(mut self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0) || !factor.is_finite() {
            return Err(Error::invalid(format!(
                "polarization factor must be finite and >= 0, got {factor}"
            )));
        }
        self.polarization_factor = factor;
        Ok(self)
    }

    /// Returns the model switched to the saturating regime.
    pub fn saturating(mut self) -> Self {
        self.regime = RateRegime::Saturating;
        self
    }
}

/// One segment of constant-rate illumination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminationStep {
    pub rates: RateCoefficients,
    /// Duration τ, μs.
    pub duration: f64,
}

impl IlluminationStep {
    pub fn new(rates: RateCoefficients, duration: f64) -> Result<Self> {
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::invalid(format!(
                "duration must be finite and >= 0, got {duration}"
            )));
        }
        Ok(IlluminationStep { rates, duration })
    }
}

/// Steady-state NV⁻ population γ_r/(γ_r+γ_i) the rates relax toward.
///
/// Errors when both rates are zero: dark evolution has no steady state.
pub fn steady_state_population(rates: RateCoefficients) -> Result<f64> {
    let total = rates.total();
    if total <= 0.0 {
        return Err(Error::numerical(
            "no-illumination steady state undefined (total rate is zero)",
        ));
    }
    Ok(rates.gamma_r / total)
}

/// Total conversion rate γ(I) for `model` at laser intensity `intensity` mW.
pub fn conversion_rate(model: &RateModel, intensity: f64) -> Result<f64> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(Error::invalid(format!(
            "intensity must be finite and >= 0 mW, got {intensity}"
        )));
    }
    let quadratic = model.alpha * intensity * intensity;
    let rate = match model.regime {
        RateRegime::PureQuadratic => quadratic,
        RateRegime::Saturating => quadratic / (1.0 + intensity / model.i_sat),
    };
    Ok(rate * model.polarization_factor)
}

/// Splits a total rate into (γ_r, γ_i) = (ρ_st·γ, (1−ρ_st)·γ), the unique
/// split whose steady state is `rho_st`.
pub fn split_rates(total: f64, rho_st: f64) -> Result<RateCoefficients> {
    if !(total >= 0.0) || !total.is_finite() {
        return Err(Error::invalid(format!(
            "total rate must be finite and >= 0, got {total}"
        )));
    }
    if !(0.0..=1.0).contains(&rho_st) {
        return Err(Error::invalid(format!(
            "steady-state population must lie in [0, 1], got {rho_st}"
        )));
    }
    RateCoefficients::new(rho_st * total, (1.0 - rho_st) * total)
}

/// Evolves the charge state through one constant-illumination step using the
/// closed form ρ₋(τ) = ρ_st + (ρ_in − ρ_st)·e^{−γτ}.
///
/// A step with zero total rate returns the state unchanged for any duration.
pub fn evolve_charge(state: ChargeState, step: &IlluminationStep) -> ChargeState {
    let gamma = step.rates.total();
    if gamma == 0.0 {
        return state;
    }
    let rho_st = step.rates.gamma_r / gamma;
    let decay = (-gamma * step.duration).exp();
    let rho = rho_st + (state.rho_minus - rho_st) * decay;
    ChargeState {
        rho_minus: rho.clamp(0.0, 1.0),
    }
}

/// Left fold of [`evolve_charge`] over a pulse train.
pub fn evolve_through_sequence(state: ChargeState, steps: &[IlluminationStep]) -> ChargeState {
    steps.iter().fold(state, evolve_charge)
}
