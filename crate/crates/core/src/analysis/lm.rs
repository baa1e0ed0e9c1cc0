//! Small damped least-squares engine shared by the nonlinear fitters.
//!
//! All fits in this crate have at most three parameters and a handful to a
//! few hundred residuals, so the implementation favors clarity: a numeric
//! central-difference Jacobian, Levenberg-Marquardt damping on the normal
//! equations, monotone residual decrease, and a relative-step stop at 1e-10
//! capped at 200 iterations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub struct LmOptions {
    pub max_iterations: usize,
    pub relative_step_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            relative_step_tolerance: 1e-10,
            initial_damping: 1e-3,
        }
    }
}

pub struct LmOutcome {
    pub params: Vec<f64>,
    pub ssr: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Parameter covariance (JᵀJ)⁻¹ · SSR/(n−p); `None` when n ≤ p or the
    /// normal matrix is singular at the optimum.
    pub covariance: Option<DMatrix<f64>>,
}

fn eval(residual_fn: &dyn Fn(&[f64]) -> Vec<f64>, p: &[f64], n: usize) -> Result<DVector<f64>> {
    let r = residual_fn(p);
    if r.len() != n {
        return Err(Error::numerical(format!(
            "residual function returned {} values, expected {n}",
            r.len()
        )));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("non-finite residual encountered"));
    }
    Ok(DVector::from_vec(r))
}

fn jacobian(
    residual_fn: &dyn Fn(&[f64]) -> Vec<f64>,
    p: &[f64],
    n: usize,
) -> Result<DMatrix<f64>> {
    let np = p.len();
    let mut j = DMatrix::zeros(n, np);
    let mut work = p.to_vec();
    for k in 0..np {
        let h = 1e-6 * (1.0 + p[k].abs());
        work[k] = p[k] + h;
        let plus = eval(residual_fn, &work, n)?;
        work[k] = p[k] - h;
        let minus = eval(residual_fn, &work, n)?;
        work[k] = p[k];
        for i in 0..n {
            j[(i, k)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Minimizes ‖residual_fn(p)‖² starting at `p0`; `n_residuals` fixes the
/// residual vector length.
pub fn minimize(
    residual_fn: &dyn Fn(&[f64]) -> Vec<f64>,
    p0: &[f64],
    n_residuals: usize,
    opts: &LmOptions,
) -> Result<LmOutcome> {
    let np = p0.len();
    let mut p = p0.to_vec();
    let mut r = eval(residual_fn, &p, n_residuals)?;
    let mut ssr = r.norm_squared();
    let mut lambda = opts.initial_damping;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=opts.max_iterations {
        iterations = iter;
        let j = jacobian(residual_fn, &p, n_residuals)?;
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * &r;

        let mut accepted = false;
        for _ in 0..30 {
            let mut damped = a.clone();
            for k in 0..np {
                let d = if a[(k, k)] > 0.0 { a[(k, k)] } else { 1.0 };
                damped[(k, k)] += lambda * d;
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&g),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let candidate: Vec<f64> = p.iter().zip(step.iter()).map(|(pk, s)| pk - s).collect();
            let r_new = eval(residual_fn, &candidate, n_residuals)?;
            let ssr_new = r_new.norm_squared();
            if ssr_new < ssr {
                let rel_step = step
                    .iter()
                    .zip(&p)
                    .map(|(s, pk)| s.abs() / (1.0 + pk.abs()))
                    .fold(0.0, f64::max);
                p = candidate;
                r = r_new;
                ssr = ssr_new;
                lambda = (lambda * 0.3).max(1e-14);
                accepted = true;
                if rel_step < opts.relative_step_tolerance {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }

        if !accepted {
            // No damping level produced a downhill step: the iterate is a
            // (numerical) stationary point. Honest convergence requires a
            // small gradient, not just exhaustion.
            let scale = (1.0 + ssr) * 1e-8;
            converged = g.iter().all(|v| v.abs() <= scale);
            break;
        }
        if converged {
            break;
        }
    }

    let covariance = if n_residuals > np {
        let j = jacobian(residual_fn, &p, n_residuals)?;
        let a = j.transpose() * &j;
        a.cholesky().map(|ch| {
            let inv = ch.inverse();
            inv * (ssr / (n_residuals - np) as f64)
        })
    } else {
        None
    };

    Ok(LmOutcome {
        params: p,
        ssr,
        iterations,
        converged,
        covariance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_linear_model_exactly() {
        // y = 3x − 2 observed exactly: SSR must hit ~0 in few iterations.
        let xs: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 2.0).collect();
        let residual = move |p: &[f64]| -> Vec<f64> {
            xs.iter()
                .zip(&ys)
                .map(|(x, y)| p[0] * x + p[1] - y)
                .collect()
        };
        let out = minimize(&residual, &[0.0, 0.0], 10, &LmOptions::default()).unwrap();
        assert!(out.converged);
        assert!((out.params[0] - 3.0).abs() < 1e-9);
        assert!((out.params[1] + 2.0).abs() < 1e-9);
        assert!(out.ssr < 1e-16);
    }

    #[test]
    fn descends_a_curved_valley() {
        // Rosenbrock in least-squares form: residuals (1−a, 10(b−a²)).
        let residual = |p: &[f64]| -> Vec<f64> { vec![1.0 - p[0], 10.0 * (p[1] - p[0] * p[0])] };
        let out = minimize(&residual, &[-1.2, 1.0], 2, &LmOptions::default()).unwrap();
        assert!((out.params[0] - 1.0).abs() < 1e-6, "{:?}", out.params);
        assert!((out.params[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn covariance_matches_linear_regression_theory() {
        // Straight-line fit with known noise: Var(slope) = σ²/Σ(x−x̄)².
        let xs: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let noise = [0.3, -0.4, 0.1, 0.2, -0.2, 0.05, -0.1, 0.25, -0.3, 0.15];
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| 1.5 * x + 4.0 + noise[i % noise.len()])
            .collect();
        let xs2 = xs.clone();
        let residual = move |p: &[f64]| -> Vec<f64> {
            xs2.iter()
                .zip(&ys)
                .map(|(x, y)| p[0] * x + p[1] - y)
                .collect()
        };
        let out = minimize(&residual, &[0.0, 0.0], 20, &LmOptions::default()).unwrap();
        let cov = out.covariance.unwrap();
        let xbar = xs.iter().sum::<f64>() / 20.0;
        let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
        let sigma2 = out.ssr / 18.0;
        assert!((cov[(0, 0)] - sigma2 / sxx).abs() < 1e-9 * (sigma2 / sxx));
    }
}
