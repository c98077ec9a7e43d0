//! Piecewise-linear finite elements for the regularized Robin Laplacian.
//!
//! The quadratic form `∫|∇u|² − ∫_{Γ₁} a_ε⁻¹ |u|²` is discretized on a
//! [`HalfDiskMesh`](crate::mesh::HalfDiskMesh) into the pencil `(A, M)` with
//! `A = K − B_ε`. The Neumann condition on the arc is natural.

mod eigen;
mod extract;
mod skyline;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sprs::{CsMat, TriMat};

use crate::error::{invalid, Error, Result};
use crate::mesh::{signed_area, HalfDiskMesh};
use crate::spectrum::SpectralParameter;
use crate::transverse::Variant;

pub use eigen::{dense_eigenpairs, solve_window, SolverOptions, Strategy};
pub use extract::{extract_in_out, matching_radii, AngularMoment};
pub use skyline::Skyline;

/// Robin coefficient `a(s) = a0 s + c2 s²` (sign) or `a0 |s| + c2 s²` (abs), and its
/// regularization `a_ε(s) = a0 sign(s) ε + a(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobinProfile {
    pub a0: f64,
    #[serde(default)]
    pub c2: f64,
    pub eps: f64,
    pub variant: Variant,
}

impl RobinProfile {
    pub fn new(a0: f64, eps: f64, variant: Variant) -> Result<Self> {
        let p = Self { a0, c2: 0.0, eps, variant };
        p.check()?;
        Ok(p)
    }

    pub fn with_c2(mut self, c2: f64) -> Result<Self> {
        self.c2 = c2;
        self.check()?;
        Ok(self)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        self.eps = eps;
        self.check()?;
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return Err(invalid(format!("a0 must be positive, got {}", self.a0)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(invalid(format!("eps must be non-negative, got {}", self.eps)));
        }
        if !self.c2.is_finite() {
            return Err(invalid("c2 must be finite"));
        }
        Ok(())
    }

    pub fn b0(&self) -> f64 {
        1.0 / self.a0
    }

    /// `a(s)`.
    pub fn a(&self, s: f64) -> f64 {
        let lin = match self.variant {
            Variant::Sign => s,
            Variant::Abs => s.abs(),
        };
        self.a0 * lin + self.c2 * s * s
    }

    /// `a_ε(s)`; at s = 0 the one-sided value is selected by `side`.
    pub fn a_eps(&self, s: f64, side: f64) -> f64 {
        let sgn = if s != 0.0 { s.signum() } else { side.signum() };
        self.a0 * sgn * self.eps + self.a(s)
    }

    /// `inf |a_ε|` over Γ₁ = [−R, R], by dense sampling plus the one-sided limits at 0.
    pub fn inf_abs_coefficient(&self, radius: f64) -> f64 {
        let mut best = self.a_eps(0.0, 1.0).abs().min(self.a_eps(0.0, -1.0).abs());
        let n = 20_000;
        for i in 1..=n {
            let s = radius * i as f64 / n as f64;
            best = best.min(self.a_eps(s, 1.0).abs()).min(self.a_eps(-s, -1.0).abs());
        }
        for z in self.zeros_on_gamma1(radius) {
            best = best.min(self.a_eps(z, z).abs());
        }
        best
    }

    /// Points of Γ₁ \ {0} where `a_ε` vanishes.
    pub fn zeros_on_gamma1(&self, radius: f64) -> Vec<f64> {
        let mut zeros = Vec::new();
        for side in [1.0f64, -1.0] {
            // with s = side·t, t ∈ (0, R]:  c2 t² + a0 v t + a0 side ε = 0
            let v = match self.variant {
                Variant::Sign => side,
                Variant::Abs => 1.0,
            };
            let (qa, qb, qc) = (self.c2, self.a0 * v, self.a0 * side * self.eps);
            let mut ts = Vec::new();
            if qa == 0.0 {
                ts.push(-qc / qb);
            } else {
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    ts.push((-qb + sq) / (2.0 * qa));
                    ts.push((-qb - sq) / (2.0 * qa));
                }
            }
            zeros.extend(ts.into_iter().filter(|&t| t > 0.0 && t <= radius).map(|t| side * t));
        }
        zeros
    }
}

/// The discrete pencil `(A, M)` with `A = K − B_ε`.
#[derive(Debug, Clone)]
pub struct SymmetricOperatorPair {
    pub a: CsMat<f64>,
    pub m: CsMat<f64>,
    /// Node index → unknown index (identity: every node carries an unknown).
    pub dof_map: Vec<usize>,
    pub mesh_id: String,
    /// ε for `assemble`, the Neumann label for `assemble_neumann`.
    pub parameter: SpectralParameter,
}

impl SymmetricOperatorPair {
    pub fn dim(&self) -> usize {
        self.dof_map.len()
    }

    /// Largest |A_ij − A_ji| and |M_ij − M_ji|.
    pub fn asymmetry(&self) -> f64 {
        asymmetry(&self.a).max(asymmetry(&self.m))
    }

    /// `xᵀ M x`.
    pub fn mass_norm_sq(&self, x: &[f64]) -> f64 {
        dot(x, &matvec(&self.m, x))
    }

    /// Writes the lower triangle of `A` and `M` in coordinate text format.
    pub fn write_coo(&self, a_out: &mut impl Write, m_out: &mut impl Write) -> Result<()> {
        write_coo(&self.a, a_out)?;
        write_coo(&self.m, m_out)?;
        Ok(())
    }
}

fn asymmetry(mat: &CsMat<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (row, vec) in mat.outer_iterator().enumerate() {
        for (col, &v) in vec.iter() {
            let t = mat.get(col, row).copied().unwrap_or(0.0);
            worst = worst.max((v - t).abs());
        }
    }
    worst
}

fn write_coo(mat: &CsMat<f64>, out: &mut impl Write) -> Result<()> {
    for (row, vec) in mat.outer_iterator().enumerate() {
        for (col, &v) in vec.iter() {
            if col <= row {
                writeln!(out, "{row} {col} {v:e}")?;
            }
        }
    }
    Ok(())
}

pub(crate) fn matvec(mat: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; mat.rows()];
    for (row, vec) in mat.outer_iterator().enumerate() {
        y[row] = vec.iter().map(|(c, &v)| v * x[c]).sum();
    }
    y
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

fn element_triplets(mesh: &HalfDiskMesh, t: [usize; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let p = t.map(|i| mesh.nodes[i]);
    let area = signed_area(&mesh.nodes, t);
    // gradients of barycentric coordinates: ∇λ_k = (y_{k+1} − y_{k+2}, x_{k+2} − x_{k+1}) / 2|T|
    let g: [[f64; 2]; 3] = std::array::from_fn(|k| {
        let (b, c) = (p[(k + 1) % 3], p[(k + 2) % 3]);
        [(b[1] - c[1]) / (2.0 * area), (c[0] - b[0]) / (2.0 * area)]
    });
    let mut ke = [[0.0; 3]; 3];
    let mut me = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ke[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            me[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    (ke, me)
}

fn stiffness_mass(mesh: &HalfDiskMesh) -> (TriMat<f64>, TriMat<f64>) {
    let n = mesh.nodes.len();
    let chunks: Vec<(Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>)> = mesh
        .triangles
        .par_chunks(4096)
        .map(|chunk| {
            let mut k = Vec::with_capacity(9 * chunk.len());
            let mut m = Vec::with_capacity(9 * chunk.len());
            for &t in chunk {
                let (ke, me) = element_triplets(mesh, t);
                for i in 0..3 {
                    for j in 0..3 {
                        k.push((t[i], t[j], ke[i][j]));
                        m.push((t[i], t[j], me[i][j]));
                    }
                }
            }
            (k, m)
        })
        .collect();
    let mut k = TriMat::new((n, n));
    let mut m = TriMat::new((n, n));
    for (kc, mc) in chunks {
        for (i, j, v) in kc {
            k.add_triplet(i, j, v);
        }
        for (i, j, v) in mc {
            m.add_triplet(i, j, v);
        }
    }
    (k, m)
}

/// Boundary matrix `B_ε_ij = ∫_{Γ₁} a_ε⁻¹ φ_i φ_j ds`, 3-point Gauss per edge.
fn boundary_triplets(mesh: &HalfDiskMesh, profile: &RobinProfile) -> Result<Vec<(usize, usize, f64)>> {
    let mut out = Vec::with_capacity(4 * mesh.gamma1.len());
    for e in &mesh.gamma1 {
        let [s0, s1] = e.s;
        if s0 < 0.0 && s1 > 0.0 {
            return Err(Error::InvalidMesh(format!("gamma1 edge [{s0}, {s1}] straddles s = 0")));
        }
        let side = if s0 + s1 > 0.0 { 1.0 } else { -1.0 };
        let (ea, eb) = (profile.a_eps(s0, side), profile.a_eps(s1, side));
        if ea == 0.0 || eb == 0.0 || ea.signum() != eb.signum() {
            return Err(invalid(format!("a_eps vanishes on the gamma1 edge [{s0}, {s1}]")));
        }
        let len = s1 - s0;
        let mut be = [[0.0; 2]; 2];
        for (x, w) in GAUSS3 {
            let t = 0.5 * (x + 1.0);
            let s = s0 + t * len;
            let inv = 1.0 / profile.a_eps(s, side);
            let phi = [1.0 - t, t];
            for i in 0..2 {
                for j in 0..2 {
                    be[i][j] += 0.5 * w * len * inv * phi[i] * phi[j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                out.push((e.nodes[i], e.nodes[j], be[i][j]));
            }
        }
    }
    Ok(out)
}

fn check_assembly_inputs(mesh: &HalfDiskMesh, profile: &RobinProfile) -> Result<()> {
    if profile.eps <= 0.0 {
        return Err(invalid("eps = 0 gives an unbounded boundary coefficient; use eps > 0"));
    }
    if let Some(z) = profile.zeros_on_gamma1(mesh.radius).first() {
        return Err(invalid(format!(
            "a_eps vanishes at s = {z} on gamma1 ({} variant); the regularized form is undefined",
            profile.variant
        )));
    }
    if mesh.triangles.is_empty() {
        return Err(Error::InvalidMesh("mesh has no triangles".into()));
    }
    Ok(())
}

/// `A = K − B_ε` and `M` for the regularized operator.
pub fn assemble(mesh: &HalfDiskMesh, profile: &RobinProfile) -> Result<SymmetricOperatorPair> {
    check_assembly_inputs(mesh, profile)?;
    let (mut k, m) = stiffness_mass(mesh);
    for (i, j, v) in boundary_triplets(mesh, profile)? {
        k.add_triplet(i, j, -v);
    }
    Ok(pair(mesh, k, m, SpectralParameter::Eps(profile.eps)))
}

/// `(K, M)` without the boundary term: the pure Neumann Laplacian.
pub fn assemble_neumann(mesh: &HalfDiskMesh) -> Result<SymmetricOperatorPair> {
    if mesh.triangles.is_empty() {
        return Err(Error::InvalidMesh("mesh has no triangles".into()));
    }
    let (k, m) = stiffness_mass(mesh);
    Ok(pair(mesh, k, m, SpectralParameter::Neumann))
}

/// The boundary matrix `B_ε` alone.
pub fn assemble_boundary(mesh: &HalfDiskMesh, profile: &RobinProfile) -> Result<CsMat<f64>> {
    check_assembly_inputs(mesh, profile)?;
    let n = mesh.nodes.len();
    let mut b = TriMat::new((n, n));
    for (i, j, v) in boundary_triplets(mesh, profile)? {
        b.add_triplet(i, j, v);
    }
    Ok(b.to_csr())
}

fn pair(mesh: &HalfDiskMesh, k: TriMat<f64>, m: TriMat<f64>, parameter: SpectralParameter) -> SymmetricOperatorPair {
    SymmetricOperatorPair {
        a: k.to_csr(),
        m: m.to_csr(),
        dof_map: (0..mesh.nodes.len()).collect(),
        mesh_id: mesh.id(),
        parameter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_half_disk_mesh;
    use rand::{Rng, SeedableRng};

    fn profile(eps: f64) -> RobinProfile {
        RobinProfile::new(1.0, eps, Variant::Sign).unwrap()
    }

    #[test]
    fn stiffness_rows_sum_to_zero() {
        let mesh = build_half_disk_mesh(1.0, 0.1, 1e-3, 1.4).unwrap();
        let p = assemble_neumann(&mesh).unwrap();
        let ones = vec![1.0; p.dim()];
        let r = matvec(&p.a, &ones);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        // total mass is the polygon area
        let mass: f64 = matvec(&p.m, &ones).iter().sum();
        assert!((mass - mesh.total_area()).abs() < 1e-12);
    }

    #[test]
    fn matrices_are_symmetric_and_mass_positive() {
        let mesh = build_half_disk_mesh(1.0, 0.1, 1e-4, 1.3).unwrap();
        let p = assemble(&mesh, &profile(1e-3)).unwrap();
        assert!(p.asymmetry() < 1e-14);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(p.mass_norm_sq(&x) > 0.0);
        }
    }

    #[test]
    fn pattern_follows_mesh_adjacency() {
        let mesh = build_half_disk_mesh(1.0, 0.25, 0.25, 2.0).unwrap();
        let p = assemble(&mesh, &profile(1e-2)).unwrap();
        let mut adj = std::collections::HashSet::new();
        for t in &mesh.triangles {
            for &i in t {
                for &j in t {
                    adj.insert((i, j));
                }
            }
        }
        for (row, vec) in p.a.outer_iterator().enumerate() {
            for (col, _) in vec.iter() {
                assert!(adj.contains(&(row, col)));
            }
        }
    }

    #[test]
    fn boundary_term_is_odd_under_reflection() {
        // the ring mesh is mirror symmetric: node (x, y) has a partner (−x, y)
        let mesh = build_half_disk_mesh(1.0, 0.1, 1e-3, 1.5).unwrap();
        let b = assemble_boundary(&mesh, &profile(1e-2)).unwrap();
        let key = |p: [f64; 2]| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        let lookup: std::collections::HashMap<_, _> =
            mesh.nodes.iter().enumerate().map(|(i, &p)| (key(p), i)).collect();
        let mirror: Vec<usize> = mesh.nodes.iter().map(|p| lookup[&key([-p[0], p[1]])]).collect();
        let mut checked = 0;
        for (row, vec) in b.outer_iterator().enumerate() {
            for (col, &v) in vec.iter() {
                if row == 0 && col == 0 {
                    continue;
                }
                let w = b.get(mirror[row], mirror[col]).copied().unwrap_or(0.0);
                assert!((v + w).abs() <= 1e-12 * v.abs().max(1.0), "{row} {col}: {v} vs {w}");
                checked += 1;
            }
        }
        assert!(checked > 20);
    }

    #[test]
    fn rejects_zero_eps_and_vanishing_coefficient() {
        let mesh = build_half_disk_mesh(1.0, 0.25, 0.25, 2.0).unwrap();
        assert!(assemble(&mesh, &RobinProfile::new(1.0, 0.0, Variant::Sign).unwrap()).is_err());
        let abs = RobinProfile::new(1.0, 1e-2, Variant::Abs).unwrap();
        assert!(abs.zeros_on_gamma1(1.0).iter().any(|z| (z + 1e-2).abs() < 1e-15));
        assert!(assemble(&mesh, &abs).is_err());
    }

    #[test]
    fn coefficient_infimum() {
        let p = RobinProfile::new(2.0, 1e-3, Variant::Sign).unwrap();
        assert!((p.inf_abs_coefficient(1.0) - 2e-3).abs() < 1e-15);
        assert!(p.zeros_on_gamma1(1.0).is_empty());
        assert_eq!(p.a_eps(0.0, 1.0), 2e-3);
        assert_eq!(p.a_eps(0.0, -1.0), -2e-3);
        let q = RobinProfile::new(1.0, 1e-3, Variant::Sign).unwrap().with_c2(0.5).unwrap();
        assert!((q.a(0.2) - 0.22).abs() < 1e-15);
    }

    #[test]
    fn coo_export_lists_lower_triangle() {
        let mesh = build_half_disk_mesh(1.0, 0.25, 0.25, 2.0).unwrap();
        let p = assemble(&mesh, &profile(1e-2)).unwrap();
        let (mut a, mut m) = (Vec::new(), Vec::new());
        p.write_coo(&mut a, &mut m).unwrap();
        let text = String::from_utf8(a).unwrap();
        let mut count = 0;
        for line in text.lines() {
            let f: Vec<&str> = line.split(' ').collect();
            let (r, c): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
            let v: f64 = f[2].parse().unwrap();
            assert!(c <= r);
            assert_eq!(v, *p.a.get(r, c).unwrap());
            count += 1;
        }
        assert_eq!(count, (p.a.nnz() + p.dim()) / 2);
        assert!(!m.is_empty());
    }
}
