//! Parameter extraction from simulated traces and curves: exponential
//! charge-decay fits, power-law exponent fits on conversion rates, and
//! one-parameter fits of the depletion resolution law to width sweeps.

pub(crate) mod lm;

use crate::error::{Error, Result};
use crate::optics::{beta_from_fwhm, resolution_eq6, ResolutionParams};
use lm::{minimize, LmOptions};

/// One fitted parameter: a name, its estimate, and (when the normal matrix is
/// well conditioned and the problem has spare degrees of freedom) a
/// linearized standard error.
#[derive(Debug, Clone)]
pub struct FitParameter {
    pub name: &'static str,
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Outcome of any fitter in this module.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    pub ssr: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn parameter(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Value of a named parameter; errors if the fit does not carry it.
    pub fn value(&self, name: &str) -> Result<f64> {
        self.parameter(name)
            .map(|p| p.value)
            .ok_or_else(|| Error::invalid(format!("fit has no parameter named {name:?}")))
    }
}

/// Which quantity a resolution sweep varied; the other is held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepVariable {
    /// Points are (doughnut peak power mW, FWHM nm) at fixed duration.
    Power { duration_us: f64 },
    /// Points are (doughnut duration μs, FWHM nm) at fixed peak power.
    Duration { power_mw: f64 },
}

/// Fits `a + b·e^{−γt}` to a fluorescence trace sampled at strictly
/// increasing times (μs). Returns parameters `gamma` (μs⁻¹), `plateau` (a)
/// and `start` (a + b). Positivity of γ is built in by optimizing u = ln γ.
pub fn fit_charge_decay(trace: &[(f64, f64)]) -> Result<FitResult> {
    if trace.len() < 4 {
        return Err(Error::invalid(format!(
            "charge-decay fit needs at least 4 points, got {}",
            trace.len()
        )));
    }
    for w in trace.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::invalid(format!(
                "trace times must be strictly increasing, got {} then {}",
                w[0].0, w[1].0
            )));
        }
    }
    if trace.iter().any(|&(t, y)| !t.is_finite() || !y.is_finite()) {
        return Err(Error::invalid("trace contains non-finite values"));
    }

    let ymin = trace.iter().map(|&(_, y)| y).fold(f64::INFINITY, f64::min);
    let ymax = trace
        .iter()
        .map(|&(_, y)| y)
        .fold(f64::NEG_INFINITY, f64::max);
    if ymax - ymin <= 1e-12 * ymax.abs().max(1.0) {
        return Err(Error::numerical("degenerate trace"));
    }

    let span = trace.last().unwrap().0 - trace[0].0;
    let a0 = trace.last().unwrap().1;
    let b0 = trace[0].1 - a0;

    // Log-linearize the mid-section: points whose distance from the plateau
    // guess is still a sizable fraction of the initial amplitude carry the
    // decay constant in the slope of ln|y − a0| versus t.
    let mut sum_t = 0.0;
    let mut sum_z = 0.0;
    let mut sum_tt = 0.0;
    let mut sum_tz = 0.0;
    let mut n_mid = 0.0;
    for &(t, y) in trace {
        let d = (y - a0).abs();
        if d > 0.05 * b0.abs() && d > 0.0 {
            let z = d.ln();
            sum_t += t;
            sum_z += z;
            sum_tt += t * t;
            sum_tz += t * z;
            n_mid += 1.0;
        }
    }
    let mut gamma0 = 3.0 / span;
    if n_mid >= 2.0 {
        let denom = n_mid * sum_tt - sum_t * sum_t;
        if denom > 0.0 {
            let slope = (n_mid * sum_tz - sum_t * sum_z) / denom;
            if slope < 0.0 && slope.is_finite() {
                gamma0 = (-slope).clamp(1e-6 / span.max(1e-300), 1e9);
            }
        }
    }

    let data: Vec<(f64, f64)> = trace.to_vec();
    let n = data.len();
    let residual = move |p: &[f64]| -> Vec<f64> {
        let gamma = p[2].exp();
        data.iter()
            .map(|&(t, y)| p[0] + p[1] * (-gamma * t).exp() - y)
            .collect()
    };
    let out = minimize(
        &residual,
        &[a0, b0, gamma0.ln()],
        n,
        &LmOptions::default(),
    )?;
    if !out.converged {
        return Err(Error::NoConvergence(format!(
            "charge-decay fit stalled after {} iterations (ssr {:.6e})",
            out.iterations, out.ssr
        )));
    }

    let gamma = out.params[2].exp();
    let (se_gamma, se_plateau, se_start) = match &out.covariance {
        Some(c) => (
            Some(gamma * c[(2, 2)].max(0.0).sqrt()),
            Some(c[(0, 0)].max(0.0).sqrt()),
            Some((c[(0, 0)] + c[(1, 1)] + 2.0 * c[(0, 1)]).max(0.0).sqrt()),
        ),
        None => (None, None, None),
    };
    Ok(FitResult {
        parameters: vec![
            FitParameter {
                name: "gamma",
                value: gamma,
                std_error: se_gamma,
            },
            FitParameter {
                name: "plateau",
                value: out.params[0],
                std_error: se_plateau,
            },
            FitParameter {
                name: "start",
                value: out.params[0] + out.params[1],
                std_error: se_start,
            },
        ],
        ssr: out.ssr,
        converged: out.converged,
        iterations: out.iterations,
    })
}

/// Fits `log γ = n·log I + c` by linear least squares and reports the
/// power-law exponent `n` (with standard error) and `coefficient` e^c, so
/// that γ ≈ coefficient·Iⁿ.
pub fn fit_power_exponent(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for &(i, g) in points {
        if !(i > 0.0) || !(g > 0.0) || !i.is_finite() || !g.is_finite() {
            return Err(Error::invalid(format!(
                "non-positive data: power-law fit needs I > 0 and rate > 0, got ({i}, {g})"
            )));
        }
    }

    // Summation order must not depend on input order.
    let mut sorted: Vec<(f64, f64)> = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let xs: Vec<f64> = sorted.iter().map(|&(i, _)| i.ln()).collect();
    let ys: Vec<f64> = sorted.iter().map(|&(_, g)| g.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    if sxx <= 0.0 {
        return Err(Error::invalid(
            "power-law fit needs at least two distinct intensities",
        ));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = slope * x + intercept - y;
            r * r
        })
        .sum();
    let (se_slope, se_intercept) = if points.len() > 2 {
        let s2 = ssr / (n - 2.0);
        (
            Some((s2 / sxx).sqrt()),
            Some((s2 * (1.0 / n + xbar * xbar / sxx)).sqrt()),
        )
    } else {
        (None, None)
    };
    let coefficient = intercept.exp();
    Ok(FitResult {
        parameters: vec![
            FitParameter {
                name: "exponent",
                value: slope,
                std_error: se_slope,
            },
            FitParameter {
                name: "coefficient",
                value: coefficient,
                std_error: se_intercept.map(|s| coefficient * s),
            },
        ],
        ssr,
        converged: true,
        iterations: 1,
    })
}

/// Fits the depletion resolution law to a width sweep by one-parameter least
/// squares over α, where each point's depletion strength is β = α·I²·τ with
/// the swept quantity taken from the point and the other held fixed.
///
/// Every FWHM must lie strictly below the zero-depletion width 2ω_D/(π√2);
/// widths at or above it are inconsistent with any α ≥ 0. A single point
/// inverts the law in closed form.
pub fn fit_resolution_curve(
    points: &[(f64, f64)],
    omega_d_nm: f64,
    variable: SweepVariable,
) -> Result<FitResult> {
    if points.is_empty() {
        return Err(Error::invalid("resolution fit needs at least one point"));
    }
    if !(omega_d_nm > 0.0) || !omega_d_nm.is_finite() {
        return Err(Error::invalid(format!(
            "omega_d must be > 0 nm, got {omega_d_nm}"
        )));
    }
    let fixed = match variable {
        SweepVariable::Power { duration_us } => duration_us,
        SweepVariable::Duration { power_mw } => power_mw,
    };
    if !(fixed > 0.0) || !fixed.is_finite() {
        return Err(Error::invalid(format!(
            "fixed sweep quantity must be > 0, got {fixed}"
        )));
    }

    let dr0 = resolution_eq6(ResolutionParams::new(omega_d_nm, 0.0)?)?;
    // β per unit α for each point.
    let mut coeffs = Vec::with_capacity(points.len());
    let mut alphas = Vec::with_capacity(points.len());
    for (idx, &(x, dr)) in points.iter().enumerate() {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::invalid(format!(
                "swept value at point {idx} must be > 0, got {x}"
            )));
        }
        if !(dr > 0.0) || !dr.is_finite() {
            return Err(Error::invalid(format!(
                "width at point {idx} must be > 0 nm, got {dr}"
            )));
        }
        if dr >= dr0 {
            return Err(Error::numerical(format!(
                "width {dr} nm at point {idx} is not below the zero-depletion width \
                 {dr0:.6} nm — inconsistent with any α ≥ 0"
            )));
        }
        let c = match variable {
            SweepVariable::Power { duration_us } => x * x * duration_us,
            SweepVariable::Duration { power_mw } => power_mw * power_mw * x,
        };
        coeffs.push(c);
        alphas.push(beta_from_fwhm(dr, omega_d_nm)? / c);
    }

    // Evaluate sums in a canonical order so the fit is bit-identical under
    // input reordering.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        (coeffs[i], points[i].1)
            .partial_cmp(&(coeffs[j], points[j].1))
            .unwrap()
    });
    let coeffs: Vec<f64> = order.iter().map(|&i| coeffs[i]).collect();
    let widths: Vec<f64> = order.iter().map(|&i| points[i].1).collect();

    let ssr_at = |alpha: f64| -> f64 {
        coeffs
            .iter()
            .zip(&widths)
            .map(|(&c, &dr)| {
                let model = resolution_eq6(ResolutionParams {
                    omega_d: omega_d_nm,
                    beta: alpha * c,
                })
                .unwrap();
                let r = model - dr;
                r * r
            })
            .sum()
    };

    let lo = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut iterations = 1usize;
    let alpha = if hi <= lo * (1.0 + 1e-14) {
        lo
    } else {
        // The total residual decreases below every per-point exact α and
        // increases above them all, so the optimum lies inside [lo, hi].
        // A log-spaced scan localizes it, golden-section polishes.
        let (llo, lhi) = (lo.ln(), hi.ln());
        let scan = 256usize;
        let mut best_k = 0usize;
        let mut best_v = f64::INFINITY;
        for k in 0..=scan {
            let a = (llo + (lhi - llo) * k as f64 / scan as f64).exp();
            let v = ssr_at(a);
            iterations += 1;
            if v < best_v {
                best_v = v;
                best_k = k;
            }
        }
        let step = (lhi - llo) / scan as f64;
        let mut a = llo + step * (best_k.saturating_sub(1)) as f64;
        let mut b = llo + step * (best_k + 1).min(scan) as f64;
        let invphi = (5.0f64.sqrt() - 1.0) / 2.0;
        let mut c1 = b - invphi * (b - a);
        let mut c2 = a + invphi * (b - a);
        let mut f1 = ssr_at(c1.exp());
        let mut f2 = ssr_at(c2.exp());
        while b - a > 1e-13 {
            iterations += 1;
            if f1 < f2 {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - invphi * (b - a);
                f1 = ssr_at(c1.exp());
            } else {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + invphi * (b - a);
                f2 = ssr_at(c2.exp());
            }
        }
        (0.5 * (a + b)).exp()
    };

    let ssr = ssr_at(alpha);
    let std_error = if points.len() > 1 {
        // Linearized error: σ_α² = s² / Σ (∂Δr_i/∂α)².
        let h = 1e-6 * alpha;
        let mut sj2 = 0.0;
        for &c in &coeffs {
            let f = |a: f64| {
                resolution_eq6(ResolutionParams {
                    omega_d: omega_d_nm,
                    beta: a * c,
                })
                .unwrap()
            };
            let j = (f(alpha + h) - f(alpha - h)) / (2.0 * h);
            sj2 += j * j;
        }
        if sj2 > 0.0 {
            Some((ssr / (points.len() - 1) as f64 / sj2).sqrt())
        } else {
            None
        }
    } else {
        None
    };

    Ok(FitResult {
        parameters: vec![FitParameter {
            name: "alpha",
            value: alpha,
            std_error,
        }],
        ssr,
        converged: true,
        iterations,
    })
}
