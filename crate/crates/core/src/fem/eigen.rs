//! Eigenvalues of the pencil `(A, M)` in a window.
//!
//! Two paths share one contract. The dense path reduces to a standard symmetric
//! problem through the Cholesky factor of `M`. The sparse path runs shift-invert
//! Lanczos at the midpoint of each subinterval and splits intervals until the
//! number of converged pairs equals the inertia count. Every returned pair is
//! polished by Rayleigh quotient iteration until its relative residual
//! `‖Au − λMu‖ / ‖Mu‖` is below the tolerance.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::skyline::{rcm_order, Skyline};
use super::{dot, matvec, SymmetricOperatorPair};
use crate::error::{invalid, Error, Result};
use crate::spectrum::{Eigenpair, Family, SpectralResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Dense below `dense_limit` unknowns, sparse above.
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    /// Relative residual bound of every returned pair.
    pub tol: f64,
    pub dense_limit: usize,
    pub strategy: Strategy,
    /// Maximum interval bisection depth of the sparse path.
    pub max_depth: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, dense_limit: 1500, strategy: Strategy::Auto, max_depth: 40 }
    }
}

impl SolverOptions {
    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }
}

struct Context<'a> {
    pair: &'a SymmetricOperatorPair,
    perm: Vec<usize>,
    tol: f64,
}

impl<'a> Context<'a> {
    fn new(pair: &'a SymmetricOperatorPair, tol: f64) -> Self {
        Self { pair, perm: rcm_order(&pair.a), tol }
    }

    /// Factors `A − σM`, nudging σ away from a singular shift.
    fn factor_near(&self, sigma: f64) -> Result<(f64, Skyline)> {
        let mut last = None;
        for attempt in 0..8 {
            let s = if attempt == 0 {
                sigma
            } else {
                sigma + 1e-9 * sigma.abs().max(1.0) * 10f64.powi(attempt) * if attempt % 2 == 1 { 1.0 } else { -1.0 }
            };
            match Skyline::factor(&self.pair.a, &self.pair.m, -s, &self.perm) {
                Ok(f) => return Ok((s, f)),
                Err(e @ Error::FactorizationBreakdown { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn count_below(&self, x: f64) -> Result<(f64, usize)> {
        let (s, f) = self.factor_near(x)?;
        Ok((s, f.negative_pivots()))
    }

    fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let av = matvec(&self.pair.a, v);
        let mv = matvec(&self.pair.m, v);
        let r: f64 = av.iter().zip(&mv).map(|(a, m)| (a - lambda * m).powi(2)).sum::<f64>().sqrt();
        r / mv.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn m_normalize(&self, v: &mut [f64]) {
        let n = dot(v, &matvec(&self.pair.m, v)).sqrt();
        // deterministic sign: largest component positive
        let big = v.iter().cloned().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        let s = if big < 0.0 { -1.0 / n } else { 1.0 / n };
        v.iter_mut().for_each(|x| *x *= s);
    }

    fn orthogonalize(&self, v: &mut [f64], against: &[(f64, Vec<f64>)]) {
        for (_, u) in against {
            let mu = matvec(&self.pair.m, u);
            let c = dot(v, &mu);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
    }

    fn rayleigh(&self, v: &[f64]) -> f64 {
        dot(v, &matvec(&self.pair.a, v)) / dot(v, &matvec(&self.pair.m, v))
    }

    /// Rayleigh quotient iteration from (λ₀, v₀), deflated against `locked`.
    fn refine(&self, lambda0: f64, v0: Vec<f64>, locked: &[(f64, Vec<f64>)]) -> Result<(f64, Vec<f64>, f64)> {
        let close: Vec<(f64, Vec<f64>)> = locked
            .iter()
            .filter(|(l, _)| (l - lambda0).abs() <= 1e-3 * l.abs().max(1.0))
            .cloned()
            .collect();
        let mut v = v0;
        self.orthogonalize(&mut v, &close);
        self.m_normalize(&mut v);
        let mut lambda = self.rayleigh(&v);
        let mut res = self.residual(lambda, &v);
        for _ in 0..12 {
            if res <= 0.01 * self.tol {
                break;
            }
            let (_, f) = self.factor_near(lambda)?;
            let mut w = f.solve(&matvec(&self.pair.m, &v));
            self.orthogonalize(&mut w, &close);
            self.m_normalize(&mut w);
            let l = self.rayleigh(&w);
            let r = self.residual(l, &w);
            v = w;
            lambda = l;
            res = r;
        }
        Ok((lambda, v, res))
    }
}

/// All eigenpairs of `(A, M)` by dense reduction; eigenvectors are M-orthonormal.
pub fn dense_eigenpairs(pair: &SymmetricOperatorPair) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = pair.dim();
    let mut a = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    for (mat, d) in [(&pair.a, &mut a), (&pair.m, &mut m)] {
        for (r, vec) in mat.outer_iterator().enumerate() {
            for (c, &v) in vec.iter() {
                d[(r, c)] = v;
            }
        }
    }
    let chol = m.cholesky().ok_or_else(|| invalid("mass matrix is not positive definite"))?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let x = l.solve_lower_triangular(&a).ok_or_else(|| invalid("singular Cholesky factor"))?;
    let c = l.solve_lower_triangular(&x.transpose()).ok_or_else(|| invalid("singular Cholesky factor"))?;
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let lt = l.transpose();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for i in idx {
        let y = eig.eigenvectors.column(i).into_owned();
        let v = lt.solve_upper_triangular(&y).ok_or_else(|| invalid("singular Cholesky factor"))?;
        values.push(eig.eigenvalues[i]);
        vectors.push(v.iter().copied().collect());
    }
    Ok((values, vectors))
}

/// Every eigenvalue of the pencil in `window`, certified by inertia counts at the endpoints.
pub fn solve_window(
    pair: &SymmetricOperatorPair,
    window: (f64, f64),
    opts: &SolverOptions,
) -> Result<SpectralResult> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(format!("window [{lo}, {hi}] is not a bounded interval")));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    let ctx = Context::new(pair, opts.tol);
    let (lo_s, n_lo) = ctx.count_below(lo)?;
    let (hi_s, n_hi) = ctx.count_below(hi)?;
    let expected = n_hi.saturating_sub(n_lo);
    let dense = match opts.strategy {
        Strategy::Dense => true,
        Strategy::Sparse => false,
        Strategy::Auto => pair.dim() <= opts.dense_limit,
    };
    let found = if expected == 0 {
        Vec::new()
    } else if dense {
        dense_window(&ctx, lo_s, hi_s)?
    } else {
        sparse_window(&ctx, lo_s, hi_s, n_lo, n_hi, opts.max_depth)?
    };
    if found.len() != expected {
        return Err(Error::Certification { lo, hi, expected, found: found.len() });
    }
    let mut result = SpectralResult::new(pair.parameter, if dense { "dense" } else { "shift-invert lanczos" });
    result.mesh_id = Some(pair.mesh_id.clone());
    for (value, vector, residual) in found {
        if residual > opts.tol {
            return Err(Error::NoConvergence(format!(
                "eigenpair at {value} has residual {residual:.2e} above {:.1e}",
                opts.tol
            )));
        }
        result.eigenpairs.push(Eigenpair { value, family: Family::Fem, residual, coefficients: None });
        result.eigenvectors.push(vector);
    }
    result.sort();
    Ok(result)
}

fn dense_window(ctx: &Context, lo: f64, hi: f64) -> Result<Vec<(f64, Vec<f64>, f64)>> {
    let (values, vectors) = dense_eigenpairs(ctx.pair)?;
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut out = Vec::new();
    for (l, v) in values.into_iter().zip(vectors) {
        if l < lo || l > hi {
            continue;
        }
        let (l, v, r) = ctx.refine(l, v, &locked)?;
        locked.push((l, v.clone()));
        out.push((l, v, r));
    }
    Ok(out)
}

struct Ritz {
    lambda: f64,
    vector: Vec<f64>,
}

/// `steps` Lanczos steps on `(A − σM)⁻¹M` in the M-inner product, deflated against `locked`.
fn lanczos(ctx: &Context, f: &Skyline, sigma: f64, steps: usize, locked: &[(f64, Vec<f64>)], seed: u64) -> Vec<Ritz> {
    let pair = ctx.pair;
    let n = pair.dim();
    let m_locked: Vec<Vec<f64>> = locked.iter().map(|(_, u)| matvec(&pair.m, u)).collect();
    let deflate = |w: &mut Vec<f64>| {
        for ((_, u), mu) in locked.iter().zip(&m_locked) {
            let c = dot(w, mu);
            w.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    // smooth the start vector through the operator so it lies in the range of the pencil
    r = f.solve(&matvec(&pair.m, &r));
    deflate(&mut r);
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut mq: Vec<Vec<f64>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut mr = matvec(&pair.m, &r);
    let mut b = dot(&r, &mr).sqrt();
    for j in 0..steps.min(n) {
        if !(b > 0.0) {
            break;
        }
        let qj: Vec<f64> = r.iter().map(|x| x / b).collect();
        let mqj: Vec<f64> = mr.iter().map(|x| x / b).collect();
        if j > 0 {
            beta.push(b);
        }
        let mut w = f.solve(&mqj);
        let a = dot(&w, &mqj);
        q.push(qj);
        mq.push(mqj);
        alpha.push(a);
        for _ in 0..2 {
            deflate(&mut w);
            for (qi, mqi) in q.iter().zip(&mq) {
                let c = dot(&w, mqi);
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        mr = matvec(&pair.m, &w);
        let nb = dot(&w, &mr).sqrt();
        if nb <= 1e-10 * a.abs().max(beta.last().copied().unwrap_or(0.0)) {
            b = 0.0;
        } else {
            b = nb;
        }
        r = w;
    }
    let k = alpha.len();
    if k == 0 {
        return Vec::new();
    }
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut out = Vec::new();
    for i in 0..k {
        let nu = eig.eigenvalues[i];
        if nu == 0.0 {
            continue;
        }
        let s = eig.eigenvectors.column(i);
        let mut v = vec![0.0; n];
        for (c, qc) in s.iter().zip(&q) {
            v.iter_mut().zip(qc).for_each(|(x, y)| *x += c * y);
        }
        out.push(Ritz { lambda: sigma + 1.0 / nu, vector: v });
    }
    out
}

fn count_in(found: &[(f64, Vec<f64>, f64)], a: f64, b: f64) -> usize {
    found.iter().filter(|(l, _, _)| *l >= a && *l < b).count()
}

fn is_duplicate(ctx: &Context, found: &[(f64, Vec<f64>, f64)], l: f64, v: &[f64]) -> bool {
    let mv = matvec(&ctx.pair.m, v);
    found.iter().any(|(fl, fv, _)| (fl - l).abs() <= 1e-7 * l.abs().max(1.0) && dot(fv, &mv).abs() > 0.5)
}

fn sparse_window(
    ctx: &Context,
    lo: f64,
    hi: f64,
    n_lo: usize,
    n_hi: usize,
    max_depth: usize,
) -> Result<Vec<(f64, Vec<f64>, f64)>> {
    let mut found: Vec<(f64, Vec<f64>, f64)> = Vec::new();
    let mut stack = vec![(lo, hi, n_lo, n_hi, 0usize)];
    let mut seed = 1u64;
    while let Some((a, b, na, nb, depth)) = stack.pop() {
        let c = nb.saturating_sub(na);
        if c == 0 || count_in(&found, a, b) >= c {
            continue;
        }
        let (sigma, f) = ctx.factor_near(0.5 * (a + b))?;
        let n_sigma = f.negative_pivots();
        let mut steps = (3 * c + 30).min(ctx.pair.dim());
        for _round in 0..3 {
            let locked: Vec<(f64, Vec<f64>)> = found.iter().map(|(l, v, _)| (*l, v.clone())).collect();
            seed += 1;
            let mut ritz = lanczos(ctx, &f, sigma, steps, &locked, seed);
            ritz.retain(|r| r.lambda >= a && r.lambda < b);
            ritz.sort_by(|x, y| (x.lambda - sigma).abs().total_cmp(&(y.lambda - sigma).abs()));
            let mut added = 0;
            for r in ritz {
                if count_in(&found, a, b) >= c {
                    break;
                }
                let locked: Vec<(f64, Vec<f64>)> = found.iter().map(|(l, v, _)| (*l, v.clone())).collect();
                let (l, v, res) = ctx.refine(r.lambda, r.vector, &locked)?;
                if res > ctx.tol || l < lo || l >= hi || is_duplicate(ctx, &found, l, &v) {
                    continue;
                }
                found.push((l, v, res));
                added += 1;
            }
            if count_in(&found, a, b) >= c || added == 0 {
                break;
            }
            steps = (2 * steps).min(ctx.pair.dim());
        }
        if count_in(&found, a, b) >= c {
            continue;
        }
        if depth >= max_depth || b - a <= 1e-12 * a.abs().max(b.abs()).max(1.0) {
            return Err(Error::Certification { lo: a, hi: b, expected: c, found: count_in(&found, a, b) });
        }
        stack.push((a, sigma, na, n_sigma, depth + 1));
        stack.push((sigma, b, n_sigma, nb, depth + 1));
    }
    found.retain(|(l, _, _)| *l >= lo && *l < hi);
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, assemble_neumann, RobinProfile};
    use crate::mesh::build_half_disk_mesh;
    use crate::transverse::Variant;

    #[test]
    fn neumann_constant_mode() {
        let mesh = build_half_disk_mesh(1.0, 0.125, 0.125, 2.0).unwrap();
        let pair = assemble_neumann(&mesh).unwrap();
        let (values, vectors) = dense_eigenpairs(&pair).unwrap();
        assert!(values[0].abs() < 1e-10);
        let v = &vectors[0];
        let spread = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-8 * v[0].abs());
    }

    #[test]
    fn dense_and_sparse_agree() {
        let mesh = build_half_disk_mesh(1.0, 0.1, 1e-4, 1.4).unwrap();
        let pair = assemble(&mesh, &RobinProfile::new(1.0, 1e-3, Variant::Sign).unwrap()).unwrap();
        let opts = SolverOptions::default();
        let d = solve_window(&pair, (-10.0, 10.0), &opts.with_strategy(Strategy::Dense)).unwrap();
        let s = solve_window(&pair, (-10.0, 10.0), &opts.with_strategy(Strategy::Sparse)).unwrap();
        assert!(!d.is_empty());
        assert_eq!(d.len(), s.len());
        for (x, y) in d.eigenvalues().iter().zip(s.eigenvalues()) {
            assert!((x - y).abs() < 1e-9 * x.abs().max(1.0), "{x} {y}");
        }
        assert!(d.residuals().iter().chain(s.residuals().iter()).all(|&r| r <= 1e-8));
    }

    #[test]
    fn inertia_count_matches_dense_count() {
        let mesh = build_half_disk_mesh(1.0, 0.2, 1e-3, 1.5).unwrap();
        let pair = assemble(&mesh, &RobinProfile::new(1.0, 1e-2, Variant::Sign).unwrap()).unwrap();
        let (values, _) = dense_eigenpairs(&pair).unwrap();
        let ctx = Context::new(&pair, 1e-8);
        for x in [-1e4, -20.0, -1.0, 2.0, 15.0] {
            let (_, n) = ctx.count_below(x).unwrap();
            assert_eq!(n, values.iter().filter(|&&l| l < x).count());
        }
    }

    #[test]
    fn sparse_handles_many_eigenvalues() {
        let mesh = build_half_disk_mesh(1.0, 0.1, 0.1, 2.0).unwrap();
        let pair = assemble_neumann(&mesh).unwrap();
        let opts = SolverOptions::default().with_strategy(Strategy::Sparse);
        let s = solve_window(&pair, (0.5, 120.0), &opts).unwrap();
        let (values, _) = dense_eigenpairs(&pair).unwrap();
        let expected: Vec<f64> = values.into_iter().filter(|&l| (0.5..120.0).contains(&l)).collect();
        assert_eq!(s.len(), expected.len());
        for (x, y) in s.eigenvalues().iter().zip(&expected) {
            assert!((x - y).abs() < 1e-8 * y.abs());
        }
    }

    #[test]
    fn rejects_bad_window() {
        let mesh = build_half_disk_mesh(1.0, 0.25, 0.25, 2.0).unwrap();
        let pair = assemble_neumann(&mesh).unwrap();
        assert!(solve_window(&pair, (1.0, -1.0), &SolverOptions::default()).is_err());
    }
}
