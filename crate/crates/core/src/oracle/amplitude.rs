//! Singular amplitude |C₀|² of normalized mode-0 eigenfunctions and the
//! derivative identity λ′(θ) = −|C₀|².

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::c_norm_closed_form;
use super::secular::{mode0_relative_residual, track_mode0};
use crate::error::{invalid, Error, Result};
use crate::kernel::{evaluate, RadialKernelParams};
use crate::quadrature::GaussLegendre;

/// Lower cut-off of the radial quadrature; the neglected part is O(r²) of a bounded integrand.
pub const R_QUAD_MIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularAmplitude {
    pub lambda: f64,
    pub theta: f64,
    /// ∫₀^R u₀(r)² r dr for the unit representation u₀ = Re[e^{iθ/2} r^{ib0} P(λr²)].
    pub radial_norm_sq: f64,
    /// L² normalization factor of u₀(r) e^{b0φ} on the half-disk.
    pub alpha: f64,
    pub c_norm: f64,
    /// |C₀|² = α² / (4 𝔠²).
    pub c0_sq: f64,
}

fn radial_integral(lambda: f64, theta: f64, radius: f64, b0: f64, panels_scale: usize) -> Result<f64> {
    let params = RadialKernelParams::singular(b0)?;
    let rule = GaussLegendre::new(20);
    let phase = Complex64::from_polar(1.0, 0.5 * theta);
    let u0 = |r: f64| -> Result<f64> {
        let p = evaluate(lambda * r * r, &params)?.p;
        Ok((phase * Complex64::from_polar(1.0, b0 * r.ln()) * p).re)
    };
    let mut total = 0.0;
    // log-uniform part on [R_QUAD_MIN, R/2] in t = ln r: ∫ u₀² e^{2t} dt
    let (t0, t1) = (R_QUAD_MIN.ln(), (0.5 * radius).ln());
    let n_log = ((t1 - t0) / 0.5).ceil() as usize * panels_scale;
    let h = (t1 - t0) / n_log as f64;
    for i in 0..n_log {
        let (a, b) = (t0 + i as f64 * h, t0 + (i + 1) as f64 * h);
        for (t, w) in rule.mapped(a, b) {
            let r = t.exp();
            let v = u0(r)?;
            total += w * v * v * r * r;
        }
    }
    // uniform part on [R/2, R]
    let n_lin = 16 * panels_scale;
    let h = 0.5 * radius / n_lin as f64;
    for i in 0..n_lin {
        let (a, b) = (0.5 * radius + i as f64 * h, 0.5 * radius + (i + 1) as f64 * h);
        for (r, w) in rule.mapped(a, b) {
            let v = u0(r)?;
            total += w * v * v * r;
        }
    }
    Ok(total)
}

/// |C₀|² for the mode-0 eigenpair (λ, θ) of A₀(θ) on the half-disk of radius R.
pub fn singular_amplitude(lambda: f64, theta: f64, radius: f64, b0: f64) -> Result<SingularAmplitude> {
    singular_amplitude_scaled(lambda, theta, radius, b0, 1.0)
}

/// As [`singular_amplitude`], starting from `raw_scale` times the unit representation.
/// The result does not depend on `raw_scale`.
pub fn singular_amplitude_scaled(
    lambda: f64,
    theta: f64,
    radius: f64,
    b0: f64,
    raw_scale: f64,
) -> Result<SingularAmplitude> {
    if raw_scale == 0.0 || !raw_scale.is_finite() {
        return Err(invalid("raw_scale must be finite and nonzero"));
    }
    let res = mode0_relative_residual(lambda, theta, radius, b0)?;
    if res > 1e-9 {
        return Err(invalid(format!(
            "lambda = {lambda} is not a mode-0 eigenvalue of A0({theta}) (secular residual {res:.2e})"
        )));
    }
    let coarse = radial_integral(lambda, theta, radius, b0, 1)?;
    let fine = radial_integral(lambda, theta, radius, b0, 2)?;
    if (coarse - fine).abs() > 1e-10 * fine.abs() {
        return Err(Error::Quadrature(format!(
            "radial norm changed from {coarse} to {fine} under panel doubling"
        )));
    }
    let raw_norm_sq = raw_scale * raw_scale * fine;
    let angular = if b0 * PI > 1e-8 { (PI * b0).sinh() / b0 } else { PI };
    let alpha_raw = 1.0 / (raw_norm_sq * angular).sqrt();
    // scale of the normalized function relative to the unit representation
    let alpha = alpha_raw * raw_scale.abs();
    let c_norm = c_norm_closed_form(b0)?;
    Ok(SingularAmplitude {
        lambda,
        theta,
        radial_norm_sq: fine,
        alpha,
        c_norm,
        c0_sq: alpha * alpha / (4.0 * c_norm * c_norm),
    })
}

/// Finite-difference check of λ′(θ) = −|C₀|² on one mode-0 branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub theta: f64,
    /// Branch index within the mode-0 eigenvalues of the scanned window.
    pub k: usize,
    pub lambda: f64,
    pub fd: f64,
    pub minus_c0_sq: f64,
    pub rel_err: f64,
}

/// Central difference `(λ(θ+h) − λ(θ−h)) / 2h` along the branch through `lambda`.
pub fn derivative_check(
    lambda: f64,
    k: usize,
    theta: f64,
    radius: f64,
    b0: f64,
    h: f64,
) -> Result<DerivativeCheck> {
    let plus = track_mode0(lambda, theta + h, radius, b0)?;
    let minus = track_mode0(lambda, theta - h, radius, b0)?;
    let fd = (plus - minus) / (2.0 * h);
    let amp = singular_amplitude(lambda, theta, radius, b0)?;
    let minus_c0_sq = -amp.c0_sq;
    Ok(DerivativeCheck {
        theta,
        k,
        lambda,
        fd,
        minus_c0_sq,
        rel_err: (fd - minus_c0_sq).abs() / minus_c0_sq.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::secular::mode0_eigenvalues;

    #[test]
    fn closed_form_at_zero() {
        // θ = 0, R = 1, b0 = 1: u₀ = cos(ln r), ∫₀¹ cos²(ln r) r dr = 3/8, |C₀|² = b0 / (2·3/8) = 4/3
        let amp = singular_amplitude(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!((amp.radial_norm_sq - 0.375).abs() < 1e-10);
        assert!((amp.c0_sq - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn scale_invariance() {
        let a = singular_amplitude_scaled(0.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let b = singular_amplitude_scaled(0.0, 0.0, 1.0, 1.0, 7.0).unwrap();
        assert!((a.c0_sq - b.c0_sq).abs() < 1e-14 * a.c0_sq);
    }

    #[test]
    fn positive_on_theta_grid() {
        for i in 0..8 {
            let theta = i as f64 * 0.75;
            for l in mode0_eigenvalues(theta, (-20.0, 20.0), 1.0, 1.0).unwrap() {
                assert!(singular_amplitude(l, theta, 1.0, 1.0).unwrap().c0_sq > 0.0);
            }
        }
    }

    #[test]
    fn derivative_identity_holds() {
        for theta in [0.3, 2.0, 5.1] {
            let roots = mode0_eigenvalues(theta, (-20.0, 20.0), 1.0, 1.0).unwrap();
            for (k, &l) in roots.iter().enumerate() {
                let chk = derivative_check(l, k, theta, 1.0, 1.0, 1e-4).unwrap();
                assert!(chk.fd < 0.0);
                assert!(chk.rel_err <= 1e-3, "{chk:?}");
            }
        }
    }

    #[test]
    fn rejects_non_eigenvalue() {
        assert!(singular_amplitude(0.3, 0.0, 1.0, 1.0).is_err());
    }
}
