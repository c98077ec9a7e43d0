//! Semi-analytic spectra of the self-adjoint extensions A₀(θ) on the half-disk.

pub mod amplitude;
pub mod basis;
pub mod secular;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{evaluate, RadialKernelParams};

pub use amplitude::{derivative_check, singular_amplitude, DerivativeCheck, SingularAmplitude};
pub use basis::{
    c_norm_closed_form, calibrate_c_norm, flux_symplectic, symplectic_closed_form, Calibration, SingularBasis,
    SingularCombination,
};
pub use secular::{
    extension_eigenvalues, mode0_eigenvalues, neumann_half_disk_eigenvalues, regular_eigenvalues, secular_mode0,
    secular_regular, track_mode0,
};

/// Reflection data of the mode-0 scattering solution `ζ_λ = S⁺ + e^{iθ_λ} S⁻ + ζ̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringData {
    pub lambda: f64,
    /// Coefficient of S⁻ (outgoing); equals e^{iθ_λ} in the scattering normalization.
    pub c_in: Complex64,
    /// Coefficient of S⁺ (incoming); 1 in the scattering normalization.
    pub c_out: Complex64,
    pub theta_lambda: f64,
}

impl ScatteringData {
    pub fn reflection_coefficient(&self) -> Complex64 {
        self.c_in / self.c_out
    }
}

/// θ_λ such that the Neumann mode-0 solution at energy λ lies in the domain of A₀(θ_λ):
/// `θ_λ = π − 2(b0 ln R + arg Q(λR²; ib0))  (mod 2π)`.
pub fn reflection_theta(lambda: f64, radius: f64, b0: f64) -> Result<ScatteringData> {
    secular::check_domain(lambda, radius)?;
    let params = RadialKernelParams::singular(b0)?;
    let v = evaluate(lambda * radius * radius, &params)?;
    if v.q.norm() <= 1e-14 * v.max_partial {
        return Err(Error::TrappedModeCandidate { lambda });
    }
    let theta_lambda = wrap(PI - 2.0 * (b0 * radius.ln() + v.q.arg()));
    Ok(ScatteringData {
        lambda,
        c_in: Complex64::from_polar(1.0, theta_lambda),
        c_out: Complex64::new(1.0, 0.0),
        theta_lambda,
    })
}

fn wrap(x: f64) -> f64 {
    crate::wrap_angle(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn angle_dist(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    }

    #[test]
    fn reflection_at_zero_energy() {
        let s = reflection_theta(0.0, 1.0, 1.0).unwrap();
        assert!(angle_dist(s.theta_lambda, 0.0) < 1e-15);
    }

    #[test]
    fn reflection_recovers_extension_parameter() {
        for theta in [0.0, 1.0, 2.5, 4.0, 6.0] {
            for l in mode0_eigenvalues(theta, (-20.0, 20.0), 1.0, 1.0).unwrap() {
                let s = reflection_theta(l, 1.0, 1.0).unwrap();
                assert!(angle_dist(s.theta_lambda, theta) < 1e-9, "theta {theta}, lambda {l}");
            }
        }
    }

    #[test]
    fn reflection_is_unimodular() {
        let mut l = -20.0;
        while l <= 20.0 {
            let s = reflection_theta(l, 1.0, 1.0).unwrap();
            assert!((s.reflection_coefficient().norm() - 1.0).abs() < 1e-14);
            assert!((s.c_in.norm() - s.c_out.norm()).abs() < 1e-15);
            l += 0.37;
        }
    }
}
