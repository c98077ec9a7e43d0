//! Singular coefficients of discrete eigenfunctions.
//!
//! On a circle of radius r the angular moment
//! `m(r) = ∫ u(r, φ) e^{b0 φ} dφ / ∫ e^{2 b0 φ} dφ` isolates the mode-0 part of
//! `u`, because the transverse modes are orthogonal. That part is
//! `𝔠 (c_in r^{ib0} P(λr²; ib0) + c_out r^{−ib0} P(λr²; −ib0))`, and both
//! coefficients follow from a linear least-squares fit over several radii.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{evaluate, RadialKernelParams};
use crate::mesh::HalfDiskMesh;
use crate::oracle::SingularBasis;
use crate::quadrature::GaussLegendre;
use crate::spectrum::{InOutCoefficients, SpectralParameter, SpectralResult};

/// Panels of the composite angular rule.
const ANGULAR_PANELS: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularMoment {
    pub radius: f64,
    pub value: f64,
}

/// `count` radii spaced uniformly in ln r strictly inside (10ε, R/4).
pub fn matching_radii(eps: f64, radius: f64, count: usize) -> Result<Vec<f64>> {
    let (lo, hi) = (10.0 * eps, radius / 4.0);
    if !(lo > 0.0 && lo < hi) {
        return Err(invalid(format!("matching annulus (10 eps, R/4) = ({lo}, {hi}) is empty")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((1..=count).map(|j| (a + (b - a) * j as f64 / (count + 1) as f64).exp()).collect())
}

/// `m(r)` for nodal values `u` by composite Gauss–Legendre quadrature on the circle of radius r.
pub fn angular_moment(mesh: &HalfDiskMesh, u: &[f64], r: f64, b0: f64) -> Result<f64> {
    let rule = GaussLegendre::new(4);
    let h = 2.0 * FRAC_PI_2 / ANGULAR_PANELS as f64;
    let mut num = 0.0;
    for k in 0..ANGULAR_PANELS {
        let a = -FRAC_PI_2 + k as f64 * h;
        for (phi, w) in rule.mapped(a, a + h) {
            let p = [r * phi.sin(), r * phi.cos()];
            let v = mesh
                .interpolate(u, p)
                .ok_or_else(|| invalid(format!("point ({}, {}) lies outside the mesh", p[0], p[1])))?;
            num += w * v * (b0 * phi).exp();
        }
    }
    let den = if b0 > 0.0 { (std::f64::consts::PI * b0).sinh() / b0 } else { std::f64::consts::PI };
    Ok(num / den)
}

/// Fits `m(r_j) ≈ 𝔠 (c_in f_j + c_out f̄_j)` with `f_j = r_j^{ib0} P(λ r_j²; ib0)`.
pub fn fit_in_out(moments: &[AngularMoment], lambda: f64, basis: &SingularBasis) -> Result<InOutCoefficients> {
    if moments.len() < 3 {
        return Err(Error::IllConditionedFit(format!("{} radii are too few (need 3)", moments.len())));
    }
    let params = RadialKernelParams::singular(basis.b0)?;
    let n = moments.len();
    let mut mat = DMatrix::zeros(2 * n, 4);
    let mut rhs = DVector::zeros(2 * n);
    for (j, m) in moments.iter().enumerate() {
        let p = evaluate(lambda * m.radius * m.radius, &params)?.p;
        let f = Complex64::from_polar(basis.c_norm, basis.b0 * m.radius.ln()) * p;
        // unknowns (Re c_in, Im c_in, Re c_out, Im c_out)
        mat[(2 * j, 0)] = f.re;
        mat[(2 * j, 1)] = -f.im;
        mat[(2 * j, 2)] = f.re;
        mat[(2 * j, 3)] = f.im;
        mat[(2 * j + 1, 0)] = f.im;
        mat[(2 * j + 1, 1)] = f.re;
        mat[(2 * j + 1, 2)] = -f.im;
        mat[(2 * j + 1, 3)] = f.re;
        rhs[2 * j] = m.value;
    }
    let svd = mat.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-8 * smax) {
        return Err(Error::IllConditionedFit(format!(
            "singular values {smin:.3e}/{smax:.3e}: radii do not resolve the oscillation"
        )));
    }
    let x = svd.solve(&rhs, 0.0).map_err(|e| Error::IllConditionedFit(e.to_string()))?;
    let res = &mat * &x - &rhs;
    let scale = rhs.norm();
    Ok(InOutCoefficients {
        c_in: Complex64::new(x[0], x[1]),
        c_out: Complex64::new(x[2], x[3]),
        fit_residual: if scale > 0.0 { res.norm() / scale } else { 0.0 },
    })
}

/// `(c_in, c_out)` of every eigenvector in `result`, fitted over `radii`.
pub fn extract_in_out(
    result: &SpectralResult,
    mesh: &HalfDiskMesh,
    basis: &SingularBasis,
    radii: &[f64],
) -> Result<Vec<InOutCoefficients>> {
    if result.eigenvectors.len() != result.eigenpairs.len() {
        return Err(invalid("spectral result carries no eigenvectors"));
    }
    if let SpectralParameter::Eps(eps) = result.parameter {
        if let Some(r) = radii.iter().find(|&&r| !(r > 10.0 * eps && r < mesh.radius / 4.0)) {
            return Err(invalid(format!("radius {r} lies outside the matching annulus (10 eps, R/4)")));
        }
    }
    if radii.iter().any(|&r| !(r > 0.0 && r < mesh.radius)) {
        return Err(invalid("radii must lie in (0, R)"));
    }
    result
        .eigenpairs
        .iter()
        .zip(&result.eigenvectors)
        .map(|(pair, u)| {
            let moments = radii
                .iter()
                .map(|&r| Ok(AngularMoment { radius: r, value: angular_moment(mesh, u, r, basis.b0)? }))
                .collect::<Result<Vec<_>>>()?;
            fit_in_out(&moments, pair.value, basis)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_half_disk_mesh;
    use crate::oracle::SingularCombination;
    use crate::spectrum::{Eigenpair, Family};

    fn synthetic(mesh: &HalfDiskMesh, comb: SingularCombination, basis: &SingularBasis) -> SpectralResult {
        let u: Vec<f64> = mesh
            .nodes
            .iter()
            .map(|p| {
                let r = p[0].hypot(p[1]);
                if r == 0.0 {
                    return 0.0;
                }
                let phi = FRAC_PI_2 - p[1].atan2(p[0]);
                comb.eval(basis.b0, basis.c_norm, r, phi).0.re
            })
            .collect();
        let mut res = SpectralResult::new(SpectralParameter::Theta(basis.theta), "synthetic");
        res.eigenpairs.push(Eigenpair { value: 0.0, family: Family::Fem, residual: 0.0, coefficients: None });
        res.eigenvectors.push(u);
        res
    }

    #[test]
    fn recovers_unit_real_solution() {
        let mesh = build_half_disk_mesh(1.0, 0.02, 1e-4, 1.05).unwrap();
        let basis = SingularBasis::new(1.0, 0.0).unwrap();
        // u = Re[r^{ib0}] e^{b0φ} = (𝔰⁻ + 𝔰⁺) / (2𝔠)
        let comb = SingularCombination::real_with_phase(0.0).scaled(Complex64::new(1.0 / basis.c_norm, 0.0));
        let res = synthetic(&mesh, comb, &basis);
        let radii = matching_radii(1e-3, 1.0, 12).unwrap();
        let c = extract_in_out(&res, &mesh, &basis, &radii).unwrap()[0];
        let expect = 0.5 / basis.c_norm;
        assert!((c.c_out.re - expect).abs() < 1e-3 * expect, "{c:?}");
        assert!(c.c_out.im.abs() < 1e-3 * expect);
        assert!(c.c_out.arg().abs() < 1e-3);
        assert!(c.fit_residual < 1e-3);
    }

    #[test]
    fn recovers_extension_phase() {
        let mesh = build_half_disk_mesh(1.0, 0.02, 1e-4, 1.05).unwrap();
        for theta in [0.4, 2.0, 5.5] {
            let basis = SingularBasis::new(1.0, theta).unwrap();
            let res = synthetic(&mesh, basis.extension_function(), &basis);
            let radii = matching_radii(1e-3, 1.0, 12).unwrap();
            let c = extract_in_out(&res, &mesh, &basis, &radii).unwrap()[0];
            let d = (c.c_out.arg() + 0.5 * theta).rem_euclid(2.0 * std::f64::consts::PI);
            assert!(d.min(2.0 * std::f64::consts::PI - d) < 1e-3, "theta {theta}: {c:?}");
            assert!((c.phase() - crate::wrap_angle(theta)).abs() < 2e-3);
            assert!(c.modulus_mismatch().abs() < 1e-6);
        }
    }

    #[test]
    fn radii_outside_annulus_rejected() {
        let mesh = build_half_disk_mesh(1.0, 0.1, 1e-4, 1.3).unwrap();
        let basis = SingularBasis::new(1.0, 0.0).unwrap();
        let mut res = synthetic(&mesh, basis.extension_function(), &basis);
        res.parameter = SpectralParameter::Eps(1e-2);
        assert!(extract_in_out(&res, &mesh, &basis, &[0.05, 0.12, 0.2]).is_err());
        assert!(matches!(
            fit_in_out(&[AngularMoment { radius: 0.1, value: 1.0 }], 0.0, &basis),
            Err(Error::IllConditionedFit(_))
        ));
        assert!(matching_radii(0.05, 1.0, 4).is_err());
    }
}
