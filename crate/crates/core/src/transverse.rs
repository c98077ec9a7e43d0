//! Angular eigenproblem of the model half-plane operator.
//!
//! In polar coordinates centred at the singular point, with φ = +π/2 on the
//! side s > 0 of the diameter, the Robin condition `a ∂_n u − u = 0` with
//! `a(s) = a0 s` separates into `−g'' = μ g` on (−π/2, π/2) with
//!
//! * sign variant: `a0 g′(±π/2) − g(±π/2) = 0`,
//! * abs variant (`a(s) = a0 |s|`): `a0 g′(π/2) − g(π/2) = 0` and
//!   `−a0 g′(−π/2) − g(−π/2) = 0`.
//!
//! The sign variant has the closed-form spectrum `{−b0²} ∪ {k², k ≥ 1}`; the abs
//! variant has one or two negative eigenvalues depending on whether `a0 > π/2`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Sign,
    Abs,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sign" => Ok(Variant::Sign),
            "abs" => Ok(Variant::Abs),
            other => Err(invalid(format!("unknown variant '{other}' (expected sign|abs)"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Sign => "sign",
            Variant::Abs => "abs",
        })
    }
}

/// Shape of one transverse eigenfunction, before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeShape {
    /// `e^{b0 φ}` (sign variant, μ = −b0²).
    Exponential { b0: f64 },
    /// `k a0 cos(k(φ+π/2)) + sin(k(φ+π/2))` (sign variant, μ = k²).
    Trigonometric { k: usize, a0: f64 },
    /// `cosh(β φ)` (abs variant, μ = −β²).
    EvenHyperbolic { beta: f64 },
    /// `sinh(β φ)` (abs variant, μ = −β²).
    OddHyperbolic { beta: f64 },
    /// `φ` (abs variant at a0 = π/2, μ = 0).
    Linear,
    /// `cos(κ φ)` (abs variant, μ = κ²).
    EvenTrigonometric { kappa: f64 },
    /// `sin(κ φ)` (abs variant, μ = κ²).
    OddTrigonometric { kappa: f64 },
}

impl ModeShape {
    /// (g, g′, g″) of the unnormalized shape.
    fn jet(&self, phi: f64) -> (f64, f64, f64) {
        match *self {
            ModeShape::Exponential { b0 } => {
                let e = (b0 * phi).exp();
                (e, b0 * e, b0 * b0 * e)
            }
            ModeShape::Trigonometric { k, a0 } => {
                let kf = k as f64;
                let t = kf * (phi + FRAC_PI_2);
                let (s, c) = t.sin_cos();
                (
                    kf * a0 * c + s,
                    -kf * kf * a0 * s + kf * c,
                    -kf * kf * (kf * a0 * c + s),
                )
            }
            ModeShape::EvenHyperbolic { beta } => {
                let (sh, ch) = ((beta * phi).sinh(), (beta * phi).cosh());
                (ch, beta * sh, beta * beta * ch)
            }
            ModeShape::OddHyperbolic { beta } => {
                let (sh, ch) = ((beta * phi).sinh(), (beta * phi).cosh());
                (sh, beta * ch, beta * beta * sh)
            }
            ModeShape::Linear => (phi, 1.0, 0.0),
            ModeShape::EvenTrigonometric { kappa } => {
                let (s, c) = (kappa * phi).sin_cos();
                (c, -kappa * s, -kappa * kappa * c)
            }
            ModeShape::OddTrigonometric { kappa } => {
                let (s, c) = (kappa * phi).sin_cos();
                (s, kappa * c, -kappa * kappa * s)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseMode {
    pub mu: f64,
    pub shape: ModeShape,
    /// Multiplier applied to the raw shape.
    pub scale: f64,
}

impl TransverseMode {
    pub fn value(&self, phi: f64) -> f64 {
        self.scale * self.shape.jet(phi).0
    }

    /// (g, g′, g″) of the normalized mode.
    pub fn jet(&self, phi: f64) -> (f64, f64, f64) {
        let (g, d1, d2) = self.shape.jet(phi);
        (self.scale * g, self.scale * d1, self.scale * d2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseSpectrum {
    pub a0: f64,
    pub b0: f64,
    pub variant: Variant,
    pub eigenvalues: Vec<f64>,
    pub modes: Vec<TransverseMode>,
}

/// JSON summary emitted by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseSummary {
    pub a0: f64,
    pub variant: Variant,
    pub eigenvalues: Vec<f64>,
    pub negative_count: usize,
}

impl TransverseSpectrum {
    pub fn negative_count(&self) -> usize {
        self.eigenvalues.iter().filter(|&&m| m < 0.0).count()
    }

    pub fn has_zero_mode(&self) -> bool {
        self.eigenvalues.iter().any(|&m| m == 0.0)
    }

    pub fn summary(&self) -> TransverseSummary {
        TransverseSummary {
            a0: self.a0,
            variant: self.variant,
            eigenvalues: self.eigenvalues.clone(),
            negative_count: self.negative_count(),
        }
    }

    pub fn mode(&self, index: usize) -> Result<&TransverseMode> {
        self.modes
            .get(index)
            .ok_or(Error::ModeIndex { index, len: self.modes.len() })
    }

    /// Boundary residuals (left at −π/2, right at +π/2) of the given variant's conditions.
    pub fn boundary_residuals(&self, index: usize) -> Result<(f64, f64)> {
        let mode = self.mode(index)?;
        let (gl, dl, _) = mode.jet(-FRAC_PI_2);
        let (gr, dr, _) = mode.jet(FRAC_PI_2);
        let left = match self.variant {
            Variant::Sign => self.a0 * dl - gl,
            Variant::Abs => -self.a0 * dl - gl,
        };
        let right = self.a0 * dr - gr;
        Ok((left, right))
    }

    /// Largest of |−g″ − μ g| over `samples` uniform points and both boundary residuals,
    /// relative to max |g| on the same samples.
    pub fn mode_residual(&self, index: usize, samples: usize) -> Result<f64> {
        let mode = self.mode(index)?;
        let n = samples.max(2);
        let mut gmax = 0.0f64;
        let mut rmax = 0.0f64;
        for i in 0..n {
            let phi = -FRAC_PI_2 + PI * i as f64 / (n - 1) as f64;
            let (g, _, d2) = mode.jet(phi);
            gmax = gmax.max(g.abs());
            rmax = rmax.max((-d2 - mode.mu * g).abs());
        }
        let (l, r) = self.boundary_residuals(index)?;
        Ok(rmax.max(l.abs()).max(r.abs()) / gmax.max(f64::MIN_POSITIVE))
    }
}

/// Evaluates mode `index` at angle φ ∈ [−π/2, π/2].
pub fn transverse_mode_eval(spec: &TransverseSpectrum, index: usize, phi: f64) -> Result<f64> {
    Ok(spec.mode(index)?.value(phi))
}

const SCAN_STEP: f64 = 0.05;
const ROOT_TOL: f64 = 1e-12;

/// Transverse spectrum: negative eigenvalues, a zero eigenvalue when a0 = π/2 (abs),
/// and the first `k_max` positive eigenvalues.
pub fn transverse_spectrum(a0: f64, variant: Variant, k_max: usize) -> Result<TransverseSpectrum> {
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(invalid(format!("a0 must be positive, got {a0}")));
    }
    if k_max < 1 {
        return Err(invalid("k_max must be at least 1"));
    }
    let b0 = 1.0 / a0;
    let modes = match variant {
        Variant::Sign => sign_modes(a0, b0, k_max),
        Variant::Abs => abs_modes(a0, k_max),
    };
    let eigenvalues = modes.iter().map(|m| m.mu).collect();
    Ok(TransverseSpectrum { a0, b0, variant, eigenvalues, modes })
}

fn sign_modes(a0: f64, b0: f64, k_max: usize) -> Vec<TransverseMode> {
    let mut modes = vec![TransverseMode {
        mu: -b0 * b0,
        shape: ModeShape::Exponential { b0 },
        scale: 1.0,
    }];
    modes.extend((1..=k_max).map(|k| TransverseMode {
        mu: (k * k) as f64,
        shape: ModeShape::Trigonometric { k, a0 },
        scale: 1.0,
    }));
    modes
}

/// Smallest |secular function| of the abs variant at μ: zero exactly at its eigenvalues.
/// Even and odd symmetry classes are both tried; the odd functions are the reduced ones
/// that stay finite at μ = 0.
pub fn abs_secular_residual(a0: f64, mu: f64) -> f64 {
    if mu < 0.0 {
        let beta = (-mu).sqrt();
        even_hyperbolic(a0, beta).abs().min(odd_hyperbolic(a0, beta).abs())
    } else {
        let kappa = mu.sqrt();
        even_trig(a0, kappa).abs().min(odd_trig(a0, kappa).abs())
    }
}

/// True when a0 equals π/2 to rounding, in which case μ = 0 with mode φ.
pub fn is_critical_slope(a0: f64) -> bool {
    (a0 - FRAC_PI_2).abs() <= 1e-12 * FRAC_PI_2
}

// Secular functions of the abs variant; the odd ones are divided by the root
// variable so the trivial root at 0 disappears (limit π/2 − a0).
fn even_hyperbolic(a0: f64, beta: f64) -> f64 {
    a0 * beta * (beta * FRAC_PI_2).tanh() - 1.0
}

fn odd_hyperbolic(a0: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        FRAC_PI_2 - a0
    } else {
        (beta * FRAC_PI_2).tanh() / beta - a0
    }
}

fn even_trig(a0: f64, kappa: f64) -> f64 {
    let (s, c) = (kappa * FRAC_PI_2).sin_cos();
    a0 * kappa * s + c
}

fn odd_trig(a0: f64, kappa: f64) -> f64 {
    let (s, c) = (kappa * FRAC_PI_2).sin_cos();
    if kappa == 0.0 {
        FRAC_PI_2 - a0
    } else {
        s / kappa - a0 * c
    }
}

fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, skip_zero: bool) -> Vec<f64> {
    let mut roots = Vec::new();
    let n = ((hi - lo) / SCAN_STEP).ceil() as usize;
    let mut x0 = lo;
    let mut f0 = f(x0);
    if f0 == 0.0 && !skip_zero {
        roots.push(x0);
    }
    for i in 1..=n {
        let x1 = lo + i as f64 * SCAN_STEP;
        let f1 = f(x1);
        if f1 == 0.0 {
            roots.push(x1);
        } else if f0 != 0.0 && f0.signum() != f1.signum() {
            roots.push(bisect(&f, x0, x1, ROOT_TOL, f64::MIN_POSITIVE));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

fn normalized(mu: f64, shape: ModeShape) -> TransverseMode {
    let raw = TransverseMode { mu, shape, scale: 1.0 };
    let (g, d, _) = raw.jet(-FRAC_PI_2);
    let gmax = (0..=64)
        .map(|i| raw.value(-FRAC_PI_2 + PI * i as f64 / 64.0).abs())
        .fold(0.0f64, f64::max);
    let scale = if g.abs() > 1e-12 * gmax { 1.0 / g } else { 1.0 / d };
    TransverseMode { mu, shape, scale }
}

fn abs_modes(a0: f64, k_max: usize) -> Vec<TransverseMode> {
    let mut modes = Vec::new();
    let upper = 10.0 / a0 + 10.0;

    // The even hyperbolic secular function increases from −1, so its root is unique.
    for beta in scan_roots(|b| even_hyperbolic(a0, b), 0.0, upper, true) {
        modes.push(normalized(-beta * beta, ModeShape::EvenHyperbolic { beta }));
    }
    let critical = is_critical_slope(a0);
    if !critical && a0 < FRAC_PI_2 {
        for beta in scan_roots(|b| odd_hyperbolic(a0, b), 0.0, upper, true) {
            if beta > 0.0 {
                modes.push(normalized(-beta * beta, ModeShape::OddHyperbolic { beta }));
            }
        }
    }
    if critical {
        modes.push(normalized(0.0, ModeShape::Linear));
    }

    let mut positive: Vec<TransverseMode> = Vec::new();
    let mut hi = (k_max as f64 + 2.0).max(4.0);
    while positive.len() < k_max {
        positive.clear();
        for kappa in scan_roots(|k| even_trig(a0, k), 0.0, hi, true) {
            if kappa > 0.0 {
                positive.push(normalized(kappa * kappa, ModeShape::EvenTrigonometric { kappa }));
            }
        }
        let odd = if critical {
            // κ = 0 is the linear mode, already listed
            scan_roots(|k| odd_trig(FRAC_PI_2, k), SCAN_STEP, hi, true)
        } else {
            scan_roots(|k| odd_trig(a0, k), 0.0, hi, true)
        };
        for kappa in odd {
            if kappa > 0.0 {
                positive.push(normalized(kappa * kappa, ModeShape::OddTrigonometric { kappa }));
            }
        }
        hi *= 2.0;
    }
    positive.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    positive.truncate(k_max);

    modes.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    modes.extend(positive);
    modes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_variant_closed_form() {
        let s = transverse_spectrum(0.5, Variant::Sign, 3).unwrap();
        assert_eq!(s.eigenvalues, vec![-4.0, 1.0, 4.0, 9.0]);
        assert_eq!(s.negative_count(), 1);
        for i in 0..s.modes.len() {
            assert!(s.mode_residual(i, 101).unwrap() <= 1e-12, "mode {i}");
        }
    }

    #[test]
    fn sign_mode_values() {
        let s = transverse_spectrum(0.5, Variant::Sign, 3).unwrap();
        assert_eq!(transverse_mode_eval(&s, 0, 0.0).unwrap(), 1.0);
        // g_1(φ) = 0.5 cos(φ+π/2) + sin(φ+π/2) at φ = π/2 gives −0.5
        assert!((transverse_mode_eval(&s, 1, FRAC_PI_2).unwrap() + 0.5).abs() < 1e-15);
        // and the endpoint φ = −π/2 gives k a0
        assert!((transverse_mode_eval(&s, 1, -FRAC_PI_2).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(transverse_mode_eval(&s, 9, 0.0), Err(Error::ModeIndex { .. })));
    }

    #[test]
    fn sign_boundary_residuals_vanish_for_many_slopes() {
        for a0 in [0.1, 0.37, 1.0, 2.5, 9.0] {
            let s = transverse_spectrum(a0, Variant::Sign, 8).unwrap();
            for i in 0..s.modes.len() {
                let (l, r) = s.boundary_residuals(i).unwrap();
                let gscale = s.modes[i].value(FRAC_PI_2).abs().max(s.modes[i].value(-FRAC_PI_2).abs());
                assert!(l.abs() <= 1e-12 * gscale.max(1.0), "a0={a0} mode {i}: {l}");
                assert!(r.abs() <= 1e-12 * gscale.max(1.0), "a0={a0} mode {i}: {r}");
            }
        }
    }

    #[test]
    fn abs_trichotomy() {
        let expected = [(0.5, 2), (1.0, 2), (1.4, 2), (1.6, 1), (2.0, 1), (3.0, 1)];
        for (a0, n) in expected {
            let s = transverse_spectrum(a0, Variant::Abs, 3).unwrap();
            assert_eq!(s.negative_count(), n, "a0={a0}");
            for i in 0..s.modes.len() {
                assert!(s.mode_residual(i, 101).unwrap() <= 1e-10, "a0={a0}, mode {i}");
            }
            assert!(s.eigenvalues.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn abs_critical_slope_has_linear_zero_mode() {
        let s = transverse_spectrum(FRAC_PI_2, Variant::Abs, 1).unwrap();
        assert!(s.has_zero_mode());
        assert_eq!(s.negative_count(), 1);
        let i = s.eigenvalues.iter().position(|&m| m == 0.0).unwrap();
        assert!(s.mode_residual(i, 101).unwrap() <= 1e-10);
        assert!(abs_secular_residual(FRAC_PI_2, 0.0) <= 1e-10);
        assert!(abs_secular_residual(1.2, 0.0) > 0.1);
        // normalized so g(−π/2) = 1: g = −2φ/π
        assert!((s.modes[i].value(0.3) + 0.3 / FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn abs_even_root_matches_bisection_oracle() {
        // oracle: bisection on β tanh(βπ/2) = 1 in (0, 2)
        let f = |b: f64| b * (b * FRAC_PI_2).tanh() - 1.0;
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if f(m) < 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        let beta_e = 0.5 * (lo + hi);
        let s = transverse_spectrum(1.0, Variant::Abs, 1).unwrap();
        assert_eq!(s.negative_count(), 2);
        let even = s
            .modes
            .iter()
            .find(|m| matches!(m.shape, ModeShape::EvenHyperbolic { .. }))
            .unwrap();
        assert!((even.mu + beta_e * beta_e).abs() <= 1e-11 * beta_e * beta_e);
    }

    #[test]
    fn odd_root_tends_to_zero_at_critical_slope() {
        let mut last = f64::INFINITY;
        for d in [1e-1, 1e-2, 1e-3, 1e-4] {
            let s = transverse_spectrum(FRAC_PI_2 - d, Variant::Abs, 1).unwrap();
            let odd = s
                .modes
                .iter()
                .find(|m| matches!(m.shape, ModeShape::OddHyperbolic { .. }))
                .unwrap();
            assert!(odd.mu.abs() < last);
            last = odd.mu.abs();
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn branches_continuous_across_critical_slope() {
        // Step 1e-3 in a0 near π/2: the sorted spectra move by O(step).
        let mut prev = transverse_spectrum(FRAC_PI_2 - 0.01, Variant::Abs, 4).unwrap().eigenvalues;
        let mut a0 = FRAC_PI_2 - 0.01;
        while a0 < FRAC_PI_2 + 0.01 {
            a0 += 1e-3;
            let cur = transverse_spectrum(a0, Variant::Abs, 4).unwrap().eigenvalues;
            // the count changes by one as the odd root crosses zero; compare the common prefix
            for (x, y) in cur.iter().zip(&prev) {
                assert!((x - y).abs() < 0.05, "a0={a0}: {x} vs {y}");
            }
            prev = cur;
        }
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(transverse_spectrum(0.0, Variant::Sign, 3).is_err());
        assert!(transverse_spectrum(1.0, Variant::Abs, 0).is_err());
        assert!("cos".parse::<Variant>().is_err());
    }
}
