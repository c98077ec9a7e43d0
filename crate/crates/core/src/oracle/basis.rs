//! Singular solutions of the model problem and the symplectic boundary flux.
//!
//! The two oscillating harmonic functions are
//!
//! ```text
//! 𝔰⁻(r, φ) = 𝔠 r^{+i b0} e^{b0 φ}   (outgoing, coefficient c_in)
//! 𝔰⁺(r, φ) = 𝔠 r^{−i b0} e^{b0 φ}   (incoming, coefficient c_out)
//! ```
//!
//! With the Green flux `ψ(u, v) = ∫ (∂_r u v̄ − u ∂_r v̄) r dφ` taken on a small
//! arc around the singular point, `ψ(𝔰⁻, 𝔰⁻) = +i`, `ψ(𝔰⁺, 𝔰⁺) = −i` and the cross
//! terms vanish once `𝔠 = (2 sinh π b0)^{−1/2}`; hence
//! `ψ(u, v) = i (c_in(u) c̄_in(v) − c_out(u) c̄_out(v))`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularBasis {
    pub b0: f64,
    pub c_norm: f64,
    /// Extension parameter θ ∈ [0, 2π).
    pub theta: f64,
}

impl SingularBasis {
    pub fn new(b0: f64, theta: f64) -> Result<Self> {
        Ok(Self { b0, c_norm: c_norm_closed_form(b0)?, theta: crate::wrap_angle(theta) })
    }

    /// The real combination spanning the domain of A₀(θ): c_in = e^{iθ} c_out.
    pub fn extension_function(&self) -> SingularCombination {
        SingularCombination::real_with_phase(self.theta)
    }
}

/// `u = minus · 𝔰⁻ + plus · 𝔰⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularCombination {
    /// c_in(u), the coefficient of 𝔰⁻ = 𝔠 r^{+ib0} e^{b0φ}.
    pub minus: Complex64,
    /// c_out(u), the coefficient of 𝔰⁺ = 𝔠 r^{−ib0} e^{b0φ}.
    pub plus: Complex64,
}

impl SingularCombination {
    pub fn outgoing() -> Self {
        Self { minus: Complex64::new(1.0, 0.0), plus: Complex64::new(0.0, 0.0) }
    }

    pub fn incoming() -> Self {
        Self { minus: Complex64::new(0.0, 0.0), plus: Complex64::new(1.0, 0.0) }
    }

    /// `(e^{iθ/2} 𝔰⁻ + e^{−iθ/2} 𝔰⁺) / 2 = 𝔠 Re[e^{iθ/2} r^{ib0}] e^{b0φ}`.
    pub fn real_with_phase(theta: f64) -> Self {
        let h = Complex64::from_polar(0.5, 0.5 * theta);
        Self { minus: h, plus: h.conj() }
    }

    pub fn scaled(self, s: Complex64) -> Self {
        Self { minus: self.minus * s, plus: self.plus * s }
    }

    pub fn c_in(&self) -> Complex64 {
        self.minus
    }

    pub fn c_out(&self) -> Complex64 {
        self.plus
    }

    /// (u, ∂_r u) at (r, φ).
    pub fn eval(&self, basis_b0: f64, c_norm: f64, r: f64, phi: f64) -> (Complex64, Complex64) {
        let ang = c_norm * (basis_b0 * phi).exp();
        let up = Complex64::from_polar(1.0, basis_b0 * r.ln());
        let dn = up.conj();
        let u = (self.minus * up + self.plus * dn) * ang;
        let du = (self.minus * up - self.plus * dn) * Complex64::new(0.0, basis_b0 / r) * ang;
        (u, du)
    }
}

/// `∫_{−π/2}^{π/2} (∂_r u · v̄ − u · ∂_r v̄) r dφ` by `quadrature_n`-point Gauss–Legendre.
pub fn flux_symplectic(
    u: &SingularCombination,
    v: &SingularCombination,
    b0: f64,
    c_norm: f64,
    r: f64,
    quadrature_n: usize,
) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(invalid(format!("flux radius must be positive, got {r}")));
    }
    if quadrature_n == 0 {
        return Err(invalid("quadrature_n must be positive"));
    }
    let rule = GaussLegendre::new(quadrature_n);
    let total = rule.integrate(-FRAC_PI_2, FRAC_PI_2, |phi| {
        let (uu, du) = u.eval(b0, c_norm, r, phi);
        let (vv, dv) = v.eval(b0, c_norm, r, phi);
        (du * vv.conj() - uu * dv.conj()) * r
    });
    Ok(total)
}

/// Closed form of the flux in terms of the coefficients: `i (c_in c̄_in − c_out c̄_out)`.
pub fn symplectic_closed_form(u: &SingularCombination, v: &SingularCombination) -> Complex64 {
    Complex64::new(0.0, 1.0) * (u.c_in() * v.c_in().conj() - u.c_out() * v.c_out().conj())
}

/// `(2 sinh π b0)^{−1/2}`, evaluated without overflow for large b0.
pub fn c_norm_closed_form(b0: f64) -> Result<f64> {
    if !(b0 > 0.0 && b0.is_finite()) {
        return Err(invalid(format!("b0 must be positive, got {b0}")));
    }
    // 2 sinh(πb0) = e^{πb0} (1 − e^{−2πb0})
    let x = PI * b0;
    Ok((-0.5 * x).exp() / (-(-2.0 * x).exp_m1()).sqrt())
}

/// Outcome of the flux calibration of 𝔠.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub b0: f64,
    pub c_norm: f64,
    /// `1 − e^{−2πb0}`, the constant printed next to the singular solutions in the source analysis;
    /// it does not give unit flux and is reported for comparison only.
    pub reference_constant: f64,
    /// |ψ(𝔰⁺, 𝔰⁺)| with the calibrated constant at two radii.
    pub flux_modulus: [f64; 2],
    pub radii: [f64; 2],
}

/// 𝔠 making |ψ(𝔰⁺, 𝔰⁺)| = 1, cross-checked by quadrature at r = 0.3 and r = 0.9.
pub fn calibrate_c_norm(b0: f64) -> Result<Calibration> {
    let c = c_norm_closed_form(b0)?;
    let radii = [0.3, 0.9];
    let s = SingularCombination::incoming();
    let mut flux_modulus = [0.0; 2];
    for (slot, &r) in flux_modulus.iter_mut().zip(&radii) {
        *slot = flux_symplectic(&s, &s, b0, c, r, 64)?.norm();
    }
    Ok(Calibration {
        b0,
        c_norm: c,
        reference_constant: -(-2.0 * PI * b0).exp_m1(),
        flux_modulus,
        radii,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cross_flux_vanishes() {
        let c = c_norm_closed_form(1.0).unwrap();
        let f = flux_symplectic(&SingularCombination::incoming(), &SingularCombination::outgoing(), 1.0, c, 0.5, 64)
            .unwrap();
        assert!(f.norm() < 1e-12);
    }

    #[test]
    fn flux_is_radius_independent_and_unit() {
        let b0 = 1.0;
        let c = c_norm_closed_form(b0).unwrap();
        let s = SingularCombination::incoming();
        let f1 = flux_symplectic(&s, &s, b0, c, 0.3, 64).unwrap();
        let f2 = flux_symplectic(&s, &s, b0, c, 0.9, 64).unwrap();
        assert!((f1 - f2).norm() < 1e-12);
        assert!((f1.norm() - 1.0).abs() < 1e-10);
        // incoming wave carries −i, outgoing +i
        assert!((f1 - Complex64::new(0.0, -1.0)).norm() < 1e-10);
        let o = SingularCombination::outgoing();
        let fo = flux_symplectic(&o, &o, b0, c, 0.3, 64).unwrap();
        assert!((fo - Complex64::new(0.0, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn calibration_values() {
        // 2 sinh π = 23.0974..., (23.0974)^{-1/2} = 0.20807...
        let two_sinh_pi = std::f64::consts::PI.exp() - (-std::f64::consts::PI).exp();
        let cal = calibrate_c_norm(1.0).unwrap();
        assert!((cal.c_norm - two_sinh_pi.powf(-0.5)).abs() < 1e-15);
        assert!((cal.c_norm - 0.20807).abs() < 1e-4);
        for m in cal.flux_modulus {
            assert!((m - 1.0).abs() < 1e-10);
        }
        assert!((cal.reference_constant - (1.0 - (-2.0 * std::f64::consts::PI).exp())).abs() < 1e-15);
    }

    #[test]
    fn c_norm_decreases_like_exponential() {
        let mut prev = f64::INFINITY;
        for b0 in [0.5, 1.0, 2.0, 5.0, 20.0, 300.0] {
            let c = c_norm_closed_form(b0).unwrap();
            assert!(c < prev);
            prev = c;
        }
        let b0 = 8.0;
        let ratio = c_norm_closed_form(b0).unwrap() / (-PI * b0 / 2.0).exp();
        assert!((ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quadrature_orders_agree() {
        let b0 = 2.3;
        let c = c_norm_closed_form(b0).unwrap();
        let u = SingularCombination::real_with_phase(0.7);
        let v = SingularCombination::incoming();
        let a = flux_symplectic(&u, &v, b0, c, 0.4, 64).unwrap();
        let b = flux_symplectic(&u, &v, b0, c, 0.4, 128).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn real_combinations_are_self_adjoint() {
        let b0 = 1.0;
        let c = c_norm_closed_form(b0).unwrap();
        let u = SingularCombination::real_with_phase(1.3);
        assert!(flux_symplectic(&u, &u, b0, c, 0.2, 64).unwrap().norm() < 1e-12);
        assert!((u.c_in() / u.c_out() - Complex64::from_polar(1.0, 1.3)).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn quadrature_matches_closed_form(
            b0 in 0.2f64..4.0,
            r in 0.01f64..2.0,
            a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0,
            e in -2.0f64..2.0, f in -2.0f64..2.0, g in -2.0f64..2.0, h in -2.0f64..2.0,
        ) {
            let cn = c_norm_closed_form(b0).unwrap();
            let u = SingularCombination { minus: Complex64::new(a, b), plus: Complex64::new(c, d) };
            let v = SingularCombination { minus: Complex64::new(e, f), plus: Complex64::new(g, h) };
            let q = flux_symplectic(&u, &v, b0, cn, r, 64).unwrap();
            let exact = symplectic_closed_form(&u, &v);
            prop_assert!((q - exact).norm() <= 1e-10 * (1.0 + exact.norm()));
        }
    }
}
