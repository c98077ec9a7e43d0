//! Entire normalized radial kernel.
//!
//! For an order `w` (either `i b0` for the singular angular mode or an integer
//! `k` for the regular ones) the series
//!
//! ```text
//! P(ζ; w) = Σ c_m ζ^m,   c_0 = 1,   c_m = −c_{m−1} / (4 m (m + w))
//! ```
//!
//! is entire in ζ, and `f(r) = r^w P(λ r²; w)` solves
//! `f'' + f'/r + (λ − w²/r²) f = 0` for every real λ. The companion
//! `Q(ζ; w) = w P + 2 ζ P'` satisfies `r ∂_r [r^w P(λr²)] = r^w Q(λr²)`, so
//! Neumann conditions become zeros of `Q`. The Gamma-function prefactor of the
//! classical Bessel normalization is absorbed, which is why no complex Gamma is
//! needed and λ < 0, λ = 0, λ > 0 share one code path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest |ζ| accepted; beyond this the alternating series loses all digits.
pub const MAX_ZETA: f64 = 4000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialKernelParams {
    pub order: Complex64,
    pub term_tolerance: f64,
    pub max_terms: usize,
}

impl RadialKernelParams {
    pub fn new(order: Complex64) -> Result<Self> {
        Self::with_tolerance(order, 1e-14, 400)
    }

    /// Order `i b0`, the singular angular mode.
    pub fn singular(b0: f64) -> Result<Self> {
        if !(b0 > 0.0) {
            return Err(invalid(format!("b0 must be positive, got {b0}")));
        }
        Self::new(Complex64::new(0.0, b0))
    }

    /// Integer order `k ≥ 0`.
    pub fn regular(k: usize) -> Result<Self> {
        Self::new(Complex64::new(k as f64, 0.0))
    }

    pub fn with_tolerance(order: Complex64, term_tolerance: f64, max_terms: usize) -> Result<Self> {
        if order.im == 0.0 && order.re < 0.0 && order.re.fract() == 0.0 {
            return Err(invalid(format!(
                "order {} is a negative integer (pole of the recurrence)",
                order.re
            )));
        }
        if !(term_tolerance > 0.0 && term_tolerance <= 1e-6) {
            return Err(invalid(format!("term_tolerance must lie in (0, 1e-6], got {term_tolerance}")));
        }
        if max_terms == 0 {
            return Err(invalid("max_terms must be positive"));
        }
        Ok(Self { order, term_tolerance, max_terms })
    }
}

/// P, P′ and Q at one argument, with cancellation metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub p: Complex64,
    pub dp: Complex64,
    pub q: Complex64,
    pub terms: usize,
    /// Largest modulus reached by the partial sums of P.
    pub max_partial: f64,
    /// Set when |P| < 1e-12 · max partial sum (alternating-series cancellation).
    pub precision_loss: bool,
}

/// Evaluates the kernel series, its term-wise derivative, and `Q`.
pub fn evaluate(zeta: f64, params: &RadialKernelParams) -> Result<KernelValue> {
    if !zeta.is_finite() || zeta.abs() > MAX_ZETA {
        return Err(Error::KernelDomain(zeta.abs()));
    }
    let w = params.order;
    let mut c = Complex64::new(1.0, 0.0);
    let mut zpow = 1.0; // ζ^m
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut max_partial = 1.0f64;
    let mut terms = 1;
    let mut converged = zeta == 0.0;
    for m in 1..params.max_terms {
        let mf = m as f64;
        c = -c / ((w + mf) * (4.0 * mf));
        // derivative term m c_m ζ^{m-1} uses the previous power
        let dterm = c * (mf * zpow);
        zpow *= zeta;
        let term = c * zpow;
        p += term;
        dp += dterm;
        terms = m + 1;
        max_partial = max_partial.max(p.norm());
        let ratio = zeta.abs() / (4.0 * (mf + 1.0) * (w + mf + 1.0).norm());
        let tail_ok = ratio < 0.5;
        let scale = max_partial.max(dp.norm());
        if tail_ok
            && term.norm() < params.term_tolerance * max_partial
            && dterm.norm() < params.term_tolerance * scale
        {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::KernelNonConvergence { zeta, max_terms: params.max_terms });
    }
    let q = w * p + dp * (2.0 * zeta);
    Ok(KernelValue {
        p,
        dp,
        q,
        terms,
        max_partial,
        precision_loss: p.norm() < 1e-12 * max_partial,
    })
}

/// `P(ζ; w)`.
pub fn kernel_p(zeta: f64, params: &RadialKernelParams) -> Result<Complex64> {
    evaluate(zeta, params).map(|v| v.p)
}

/// `Q(ζ; w) = w P(ζ; w) + 2 ζ P′(ζ; w)`.
pub fn kernel_q(zeta: f64, params: &RadialKernelParams) -> Result<Complex64> {
    evaluate(zeta, params).map(|v| v.q)
}

/// Series coefficients `c_0..c_{n-1}`; exposed for recurrence checks.
pub fn coefficients(params: &RadialKernelParams, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let mut c = Complex64::new(1.0, 0.0);
    for m in 0..n {
        if m > 0 {
            let mf = m as f64;
            c = -c / ((params.order + mf) * (4.0 * mf));
        }
        out.push(c);
    }
    out
}

/// Radial solution `r^w P(λ r²; w)` and its derivative in r.
pub fn radial_solution(r: f64, lambda: f64, params: &RadialKernelParams) -> Result<(Complex64, Complex64)> {
    let v = evaluate(lambda * r * r, params)?;
    let rw = Complex64::new(r, 0.0).powc(params.order);
    Ok((rw * v.p, rw * v.q / r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn singular(b0: f64) -> RadialKernelParams {
        RadialKernelParams::singular(b0).unwrap()
    }

    // Classical series J_0(x) = Σ (−x²/4)^m / (m!)², J_1(x) = Σ (−1)^m (x/2)^{2m+1} / (m!(m+1)!).
    fn bessel_j0(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..80 {
            term *= -(x * x / 4.0) / ((m * m) as f64);
            sum += term;
        }
        sum
    }

    fn bessel_j1(x: f64) -> f64 {
        let mut term = x / 2.0;
        let mut sum = term;
        for m in 1..80 {
            term *= -(x * x / 4.0) / ((m * (m + 1)) as f64);
            sum += term;
        }
        sum
    }

    fn bessel_j1_prime(x: f64) -> f64 {
        // J_1' = J_0 − J_1/x
        bessel_j0(x) - bessel_j1(x) / x
    }

    fn bisect_oracle(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let fa0 = f(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m).signum() == fa0.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn p_at_zero_is_one() {
        for w in [Complex64::new(0.0, 0.5), Complex64::new(3.0, 0.0), Complex64::new(0.0, 0.0)] {
            let params = RadialKernelParams::new(w).unwrap();
            assert_eq!(kernel_p(0.0, &params).unwrap(), Complex64::new(1.0, 0.0));
            assert_eq!(kernel_q(0.0, &params).unwrap(), w);
        }
    }

    #[test]
    fn order_zero_matches_j0_and_first_root() {
        let params = RadialKernelParams::regular(0).unwrap();
        for z in [0.3, 2.0, 7.5, 30.0] {
            let p = kernel_p(z, &params).unwrap();
            assert!((p.re - bessel_j0(z.sqrt())).abs() < 1e-12);
            assert_eq!(p.im, 0.0);
        }
        // oracle: j_{0,1}^2 from the classical J0 series
        let j01 = bisect_oracle(bessel_j0, 2.0, 3.0);
        let ours = bisect_oracle(|z| kernel_p(z, &params).unwrap().re, 4.0, 9.0);
        assert!((ours - j01 * j01).abs() < 1e-10);
        assert!((ours - 5.7832).abs() < 1e-4);
    }

    #[test]
    fn order_zero_q_root_is_j11_squared() {
        // Q(ζ;0) = 2ζP′ = −√ζ J_1(√ζ); first positive root j_{1,1}² ≈ 14.682
        let params = RadialKernelParams::regular(0).unwrap();
        let j11 = bisect_oracle(bessel_j1, 3.0, 4.5);
        let ours = bisect_oracle(|z| kernel_q(z, &params).unwrap().re, 9.0, 20.0);
        assert!((ours - j11 * j11).abs() < 1e-9);
        assert!((ours - 14.6820).abs() < 1e-3);
        for z in [1.0, 5.0, 12.0] {
            let q = kernel_q(z, &params).unwrap().re;
            assert!((q + z.sqrt() * bessel_j1(z.sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn order_one_q_root_is_j1_prime_zero() {
        let params = RadialKernelParams::regular(1).unwrap();
        let jp = bisect_oracle(bessel_j1_prime, 1.0, 2.5);
        let ours = bisect_oracle(|z| kernel_q(z, &params).unwrap().re, 2.0, 5.0);
        assert!((ours - jp * jp).abs() < 1e-9);
        assert!((ours - 3.3900).abs() < 1e-3);
    }

    // Fourth-order central differences of f(r) = r^w P(λ r²).
    fn ode_residual(w: Complex64, lambda: f64, r: f64) -> f64 {
        let params = RadialKernelParams::new(w).unwrap();
        let f = |x: f64| radial_solution(x, lambda, &params).unwrap().0;
        let h = 1e-3 * r;
        let (fm2, fm1, f0, fp1, fp2) = (f(r - 2.0 * h), f(r - h), f(r), f(r + h), f(r + 2.0 * h));
        let d1 = (fm2 - fm1 * 8.0 + fp1 * 8.0 - fp2) / (12.0 * h);
        let d2 = (-fm2 + fm1 * 16.0 - f0 * 30.0 + fp1 * 16.0 - fp2) / (12.0 * h * h);
        let res = d2 + d1 / r + f0 * (Complex64::new(lambda, 0.0) - w * w / (r * r));
        let scale = d2.norm() + (d1 / r).norm() + (f0 * (w * w / (r * r))).norm() + (f0 * lambda).norm();
        res.norm() / scale
    }

    #[test]
    fn solves_radial_ode() {
        let w = Complex64::new(0.0, 0.5);
        for r in [0.1, 0.5, 1.0] {
            let rel = ode_residual(w, 3.0, r);
            assert!(rel <= 1e-9, "r={r}: {rel:e}");
        }
    }

    #[test]
    fn q_matches_numerical_derivative() {
        let params = RadialKernelParams::new(Complex64::new(0.0, 0.7)).unwrap();
        let lambda = -2.0;
        let f = |x: f64| radial_solution(x, lambda, &params).unwrap().0;
        let h = 1e-5;
        let fd = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        let q = kernel_q(lambda, &params).unwrap();
        assert!((fd - q).norm() <= 1e-9 * q.norm().max(1.0), "{fd} vs {q}");
    }

    #[test]
    fn recurrence_is_exact() {
        let params = singular(1.3);
        let c = coefficients(&params, 30);
        for m in 1..30 {
            let mf = m as f64;
            let lhs = c[m] * ((params.order + mf) * (4.0 * mf)) + c[m - 1];
            assert!(lhs.norm() <= 1e-15 * c[m - 1].norm());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RadialKernelParams::new(Complex64::new(-2.0, 0.0)).is_err());
        assert!(RadialKernelParams::with_tolerance(Complex64::new(0.0, 1.0), 1e-3, 10).is_err());
        assert!(kernel_p(5000.0, &singular(1.0)).is_err());
        let tiny = RadialKernelParams::with_tolerance(Complex64::new(0.0, 1.0), 1e-14, 3).unwrap();
        assert!(matches!(kernel_p(100.0, &tiny), Err(Error::KernelNonConvergence { .. })));
    }

    #[test]
    fn flags_cancellation_for_large_positive_zeta() {
        let params = RadialKernelParams::regular(0).unwrap();
        let v = evaluate(3900.0, &params).unwrap();
        assert!(v.max_partial > 1e20);
        assert!(v.precision_loss);
        assert!(!evaluate(-3900.0, &params).unwrap().precision_loss);
    }

    proptest! {
        #[test]
        fn conjugation_symmetry(b0 in 0.1f64..5.0, zeta in -100f64..100.0) {
            let a = kernel_p(zeta, &singular(b0)).unwrap();
            let b = kernel_p(zeta, &RadialKernelParams::new(Complex64::new(0.0, -b0)).unwrap()).unwrap();
            prop_assert!((a.conj() - b).norm() <= 1e-13 * a.norm().max(1.0));
        }

        #[test]
        fn no_jumps_between_nearby_arguments(b0 in 0.2f64..3.0, zeta in -100f64..100.0, delta in -1e-3f64..1e-3) {
            let params = singular(b0);
            let v0 = evaluate(zeta, &params).unwrap();
            let v1 = evaluate(zeta + delta, &params).unwrap();
            // |P(ζ+δ) − P(ζ)| ≤ |δ| sup|P′|; sup over the tiny interval bounded by endpoint values plus slack
            let bound = delta.abs() * (v0.dp.norm().max(v1.dp.norm()) * 1.01 + 1e-9);
            prop_assert!((v1.p - v0.p).norm() <= bound + 1e-13 * v0.max_partial);
        }
    }
}
