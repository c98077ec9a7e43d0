//! Separated eigenvalue equations on the exact half-disk with `a(s) = a0 s`.
//!
//! A real eigenfunction of A₀(θ) in the singular angular mode is
//! `u = u₀(r) e^{b0 φ}` with `u₀(r) = Re[e^{iθ/2} r^{ib0} P(λr²; ib0)]`: near the
//! origin it equals `(e^{iθ/2} 𝔰⁻ + e^{−iθ/2} 𝔰⁺) / (2𝔠)`, so `c_in = e^{iθ} c_out`.
//! The Neumann condition on the arc, `R u₀′(R) = Re[e^{iθ/2} R^{ib0} Q(λR²)] = 0`,
//! is the mode-0 secular equation. Regular modes `r^k P(λr²; k) g_k(φ)` need
//! `Q(λR²; k) = 0` and do not see θ.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::kernel::{evaluate, RadialKernelParams, MAX_ZETA};
use crate::roots::{bisect, scan_brackets};
use crate::spectrum::{Eigenpair, Family, SpectralParameter, SpectralResult};

/// λ grid step of the bracketing scan.
pub const SCAN_STEP: f64 = 0.25;
/// Relative bisection tolerance of every root.
pub const ROOT_TOL: f64 = 1e-12;

pub(crate) fn check_domain(lambda: f64, r: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    if (lambda * r * r).abs() > MAX_ZETA {
        return Err(Error::KernelDomain((lambda * r * r).abs()));
    }
    Ok(())
}

/// `G(λ) = Re[e^{iθ/2} e^{i b0 ln R} Q(λR²; i b0)]`; zeros are the mode-0 eigenvalues of A₀(θ).
pub fn secular_mode0(lambda: f64, theta: f64, radius: f64, b0: f64) -> Result<f64> {
    check_domain(lambda, radius)?;
    let params = RadialKernelParams::singular(b0)?;
    let q = evaluate(lambda * radius * radius, &params)?.q;
    Ok((Complex64::from_polar(1.0, 0.5 * theta + b0 * radius.ln()) * q).re)
}

/// `G` divided by |Q|: a dimensionless residual for reporting.
pub(crate) fn mode0_relative_residual(lambda: f64, theta: f64, radius: f64, b0: f64) -> Result<f64> {
    let params = RadialKernelParams::singular(b0)?;
    let q = evaluate(lambda * radius * radius, &params)?.q;
    let g = (Complex64::from_polar(1.0, 0.5 * theta + b0 * radius.ln()) * q).re;
    Ok(g.abs() / q.norm())
}

/// `Q(λR²; k)`, real for integer k; zeros are the regular-family eigenvalues.
pub fn secular_regular(lambda: f64, k: usize, radius: f64) -> Result<f64> {
    check_domain(lambda, radius)?;
    let params = RadialKernelParams::regular(k)?;
    Ok(evaluate(lambda * radius * radius, &params)?.q.re)
}

fn roots_of(
    f: impl Fn(f64) -> Result<f64>,
    window: (f64, f64),
) -> Result<Vec<f64>> {
    // validate the whole window once so the closures below cannot fail mid-scan
    let (lo, hi) = window;
    f(lo)?;
    f(hi)?;
    let g = |x: f64| f(x).unwrap_or(f64::NAN);
    let brackets = scan_brackets(g, lo, hi, SCAN_STEP);
    Ok(brackets
        .into_iter()
        .map(|(a, b)| if a == b { a } else { bisect(g, a, b, ROOT_TOL, 1.0) })
        .collect())
}

/// Mode-0 eigenvalues of A₀(θ) in `window`.
pub fn mode0_eigenvalues(theta: f64, window: (f64, f64), radius: f64, b0: f64) -> Result<Vec<f64>> {
    validate_window(window)?;
    roots_of(|l| secular_mode0(l, theta, radius, b0), window)
}

/// Roots of `Q(λR²; k)` in `window`.
pub fn regular_eigenvalues(k: usize, window: (f64, f64), radius: f64) -> Result<Vec<f64>> {
    validate_window(window)?;
    roots_of(|l| secular_regular(l, k, radius), window)
}

fn validate_window(window: (f64, f64)) -> Result<()> {
    if !(window.0.is_finite() && window.1.is_finite() && window.0 <= window.1) {
        return Err(invalid(format!("window [{}, {}] is not a bounded interval", window.0, window.1)));
    }
    Ok(())
}

/// Every eigenvalue of A₀(θ) in `window`: the θ-dependent mode-0 family plus the regular
/// families k = 1..=k_angular_max, each entry labelled with its family.
pub fn extension_eigenvalues(
    theta: f64,
    window: (f64, f64),
    radius: f64,
    b0: f64,
    k_angular_max: usize,
) -> Result<SpectralResult> {
    let mut result = SpectralResult::new(SpectralParameter::Theta(theta), "separation of variables");
    for value in mode0_eigenvalues(theta, window, radius, b0)? {
        let residual = mode0_relative_residual(value, theta, radius, b0)?;
        result.eigenpairs.push(Eigenpair { value, family: Family::Mode0, residual, coefficients: None });
    }
    let regular: Vec<Result<Vec<Eigenpair>>> = (1..=k_angular_max)
        .into_par_iter()
        .map(|k| regular_pairs(k, window, radius))
        .collect();
    for r in regular {
        result.eigenpairs.extend(r?);
    }
    result.sort();
    Ok(result)
}

fn regular_pairs(k: usize, window: (f64, f64), radius: f64) -> Result<Vec<Eigenpair>> {
    let params = RadialKernelParams::regular(k)?;
    regular_eigenvalues(k, window, radius)?
        .into_iter()
        .map(|value| {
            let v = evaluate(value * radius * radius, &params)?;
            let scale = v.max_partial * (k as f64).max(1.0);
            Ok(Eigenpair { value, family: Family::Regular { k }, residual: v.q.re.abs() / scale, coefficients: None })
        })
        .collect()
}

/// Pure-Neumann half-disk eigenvalues `Q(λR²; n) = 0`, n = 0..=n_max (includes λ = 0).
pub fn neumann_half_disk_eigenvalues(window: (f64, f64), radius: f64, n_max: usize) -> Result<Vec<f64>> {
    let mut all = Vec::new();
    for n in 0..=n_max {
        all.extend(regular_eigenvalues(n, window, radius)?);
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// Follows a mode-0 branch from (λ₀, θ₀) to θ₁ by expanding a bracket around λ₀.
pub fn track_mode0(lambda0: f64, theta1: f64, radius: f64, b0: f64) -> Result<f64> {
    let g = |l: f64| secular_mode0(l, theta1, radius, b0);
    let g0 = g(lambda0)?;
    if g0 == 0.0 {
        return Ok(lambda0);
    }
    let mut delta = 1e-6 * lambda0.abs().max(1.0);
    for _ in 0..60 {
        let (a, b) = (lambda0 - delta, lambda0 + delta);
        let (ga, gb) = (g(a)?, g(b)?);
        if ga.signum() != g0.signum() || ga == 0.0 {
            return Ok(bisect(|x| g(x).unwrap_or(f64::NAN), a, lambda0, ROOT_TOL, 1.0));
        }
        if gb.signum() != g0.signum() || gb == 0.0 {
            return Ok(bisect(|x| g(x).unwrap_or(f64::NAN), lambda0, b, ROOT_TOL, 1.0));
        }
        delta *= 2.0;
    }
    Err(invalid(format!("could not follow the mode-0 branch from lambda = {lambda0}")))
}
