//! Graded triangulations of the half-disk `{x₁² + x₂² < R², x₂ > 0}`.
//!
//! The mesh is built from concentric half-rings around the origin. Ring radii
//! grow geometrically from `r_min` while the radial step stays below `h_max`,
//! then uniformly up to `R`. Each ring carries at least `⌈π/(ratio − 1)⌉`
//! angular segments, so elements near the origin are shape-regular and the
//! resolution is uniform in `ln r`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Geometric grading near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub r_min: f64,
    pub ratio: f64,
}

/// A boundary edge on the diameter with its abscissa interval `[s_lo, s_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gamma1Edge {
    pub nodes: [usize; 2],
    pub s: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfDiskMesh {
    pub radius: f64,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub gamma1: Vec<Gamma1Edge>,
    pub gamma2: Vec<[usize; 2]>,
    pub grading: Option<Grading>,
    pub h_max: Option<f64>,
    /// Ring radii (origin excluded) when the mesh was generated here.
    pub rings: Vec<f64>,
    locator: Locator,
}

/// The exchange format: `{R, nodes, triangles, gamma1, gamma2}` with 0-based indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshDocument {
    #[serde(rename = "R")]
    pub radius: f64,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub gamma1: Vec<[usize; 2]>,
    pub gamma2: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<Grading>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_max: Option<f64>,
}

/// Builds the graded half-disk mesh.
pub fn build_half_disk_mesh(radius: f64, h_max: f64, r_min: f64, ratio: f64) -> Result<HalfDiskMesh> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid(format!("R > 0 violated: R = {radius}")));
    }
    if !(r_min > 0.0) {
        return Err(invalid(format!("r_min > 0 violated: r_min = {r_min}")));
    }
    if !(r_min <= h_max) {
        return Err(invalid(format!("r_min <= h_max violated: r_min = {r_min}, h_max = {h_max}")));
    }
    if !(h_max <= radius / 4.0 * (1.0 + 1e-12)) {
        return Err(invalid(format!("h_max <= R/4 violated: h_max = {h_max}, R = {radius}")));
    }
    if !(ratio > 1.0 && ratio <= 2.0) {
        return Err(invalid(format!("1 < ratio <= 2 violated: ratio = {ratio}")));
    }

    let rings = ring_radii(radius, h_max, r_min, ratio);
    let n_min = ((PI / (ratio - 1.0)).ceil() as usize).max(6);
    let mut segments = Vec::with_capacity(rings.len());
    let mut prev = n_min;
    for &rho in &rings {
        let n = prev.max((PI * rho / h_max).ceil() as usize);
        segments.push(n);
        prev = n;
    }

    let mut nodes = vec![[0.0, 0.0]];
    let mut first = Vec::with_capacity(rings.len());
    for (j, &rho) in rings.iter().enumerate() {
        first.push(nodes.len());
        let n = segments[j];
        for i in 0..=n {
            let alpha = PI * i as f64 / n as f64;
            let p = if i == 0 {
                [rho, 0.0]
            } else if i == n {
                [-rho, 0.0]
            } else {
                [rho * alpha.cos(), rho * alpha.sin()]
            };
            nodes.push(p);
        }
    }

    let mut triangles = Vec::new();
    // fan around the origin
    for i in 0..segments[0] {
        push_oriented(&nodes, &mut triangles, [0, first[0] + i, first[0] + i + 1]);
    }
    for j in 0..rings.len() - 1 {
        let (na, nb) = (segments[j], segments[j + 1]);
        let (fa, fb) = (first[j], first[j + 1]);
        let (mut ia, mut ib) = (0usize, 0usize);
        while ia < na || ib < nb {
            // advance along whichever ring has the next node at the smaller angle
            let next_a = if ia < na { (ia + 1) as f64 / na as f64 } else { f64::INFINITY };
            let next_b = if ib < nb { (ib + 1) as f64 / nb as f64 } else { f64::INFINITY };
            if next_b <= next_a {
                push_oriented(&nodes, &mut triangles, [fa + ia, fb + ib, fb + ib + 1]);
                ib += 1;
            } else {
                push_oriented(&nodes, &mut triangles, [fa + ia, fb + ib, fa + ia + 1]);
                ia += 1;
            }
        }
    }

    let mut gamma1 = Vec::new();
    let last = rings.len() - 1;
    for j in 0..rings.len() {
        let (inner_pos, inner_neg) = if j == 0 { (0, 0) } else { (first[j - 1], first[j - 1] + segments[j - 1]) };
        gamma1.push(gamma1_edge(&nodes, inner_pos, first[j]));
        gamma1.push(gamma1_edge(&nodes, inner_neg, first[j] + segments[j]));
    }
    gamma1.sort_by(|a, b| a.s[0].total_cmp(&b.s[0]));
    let gamma2 = (0..segments[last]).map(|i| [first[last] + i, first[last] + i + 1]).collect();

    let mut mesh = HalfDiskMesh {
        radius,
        nodes,
        triangles,
        gamma1,
        gamma2,
        grading: Some(Grading { r_min, ratio }),
        h_max: Some(h_max),
        rings,
        locator: Locator::default(),
    };
    mesh.locator = Locator::build(&mesh);
    Ok(mesh)
}

fn ring_radii(radius: f64, h_max: f64, r_min: f64, ratio: f64) -> Vec<f64> {
    let mut rings = vec![r_min];
    let mut rho = r_min;
    loop {
        let next = rho * ratio;
        if next - rho >= h_max * (1.0 - 1e-12) || next > radius - 0.5 * h_max {
            break;
        }
        rings.push(next);
        rho = next;
    }
    let gap = radius - rho;
    let steps = ((gap / h_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    for i in 1..=steps {
        rings.push(if i == steps { radius } else { rho + gap * i as f64 / steps as f64 });
    }
    rings
}

fn push_oriented(nodes: &[[f64; 2]], triangles: &mut Vec<[usize; 3]>, t: [usize; 3]) {
    if signed_area(nodes, t) < 0.0 {
        triangles.push([t[0], t[2], t[1]]);
    } else {
        triangles.push(t);
    }
}

fn gamma1_edge(nodes: &[[f64; 2]], a: usize, b: usize) -> Gamma1Edge {
    let (sa, sb) = (nodes[a][0], nodes[b][0]);
    if sa <= sb {
        Gamma1Edge { nodes: [a, b], s: [sa, sb] }
    } else {
        Gamma1Edge { nodes: [b, a], s: [sb, sa] }
    }
}

/// Twice-signed area divided by two.
pub fn signed_area(nodes: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let [a, b, c] = t.map(|i| nodes[i]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Signed abscissa of a point on the diameter: its x₁ coordinate.
pub fn abscissa_of_gamma1_point(mesh: &HalfDiskMesh, point: [f64; 2]) -> Result<f64> {
    let tol = 1e-12 * mesh.radius;
    let [x, y] = point;
    let overshoot = (x.abs() - mesh.radius).max(0.0);
    let distance = y.abs().max(overshoot);
    if distance > tol {
        return Err(Error::OffDiameter { x, y, distance });
    }
    Ok(x)
}

impl HalfDiskMesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|&t| signed_area(&self.nodes, t)).sum()
    }

    /// Number of distinct edges.
    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    fn edges(&self) -> std::collections::HashMap<(usize, usize), usize> {
        let mut edges = std::collections::HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    /// Shortest Γ₁ edge touching the origin.
    pub fn origin_gamma1_length(&self) -> f64 {
        self.gamma1
            .iter()
            .filter(|e| e.s[0] == 0.0 || e.s[1] == 0.0)
            .map(|e| e.s[1] - e.s[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the node at the origin.
    pub fn origin_node(&self) -> Option<usize> {
        self.nodes.iter().position(|p| p[0] == 0.0 && p[1] == 0.0)
    }

    /// A short deterministic identifier of the mesh parameters.
    pub fn id(&self) -> String {
        match (self.grading, self.h_max) {
            (Some(g), Some(h)) => format!(
                "R{}_h{}_rmin{:.6e}_q{:.6}_n{}",
                self.radius,
                h,
                g.r_min,
                g.ratio,
                self.nodes.len()
            ),
            _ => format!("R{}_n{}_t{}", self.radius, self.nodes.len(), self.triangles.len()),
        }
    }

    /// Checks every structural invariant and reports the first violation.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        let bad = |m: String| Err(Error::InvalidMesh(m));
        if self.origin_node().is_none() {
            return bad("no node at the origin".into());
        }
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n) {
                return bad(format!("triangle {i} references a missing node"));
            }
            if signed_area(&self.nodes, *t) <= 0.0 {
                return bad(format!("triangle {i} is not positively oriented"));
            }
        }
        let edges = self.edges();
        let mut tagged = std::collections::HashMap::new();
        for e in &self.gamma1 {
            let [a, b] = e.nodes;
            if self.nodes[a][1] != 0.0 || self.nodes[b][1] != 0.0 {
                return bad(format!("gamma1 edge ({a}, {b}) is off the diameter"));
            }
            if e.s[0] < 0.0 && e.s[1] > 0.0 {
                return bad(format!("gamma1 edge ({a}, {b}) straddles s = 0"));
            }
            *tagged.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        for &[a, b] in &self.gamma2 {
            for v in [a, b] {
                let r = self.nodes[v][0].hypot(self.nodes[v][1]);
                if (r - self.radius).abs() > 1e-12 * self.radius {
                    return bad(format!("gamma2 node {v} is off the circle (r = {r})"));
                }
            }
            *tagged.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        for (e, &count) in &edges {
            let boundary = count == 1;
            match (boundary, tagged.get(e).copied().unwrap_or(0)) {
                (true, 1) | (false, 0) => {}
                (true, t) => return bad(format!("boundary edge {e:?} tagged {t} times")),
                (false, _) => return bad(format!("interior edge {e:?} is tagged")),
            }
            if count > 2 {
                return bad(format!("edge {e:?} shared by {count} triangles"));
            }
        }
        if tagged.len() != self.gamma1.len() + self.gamma2.len() {
            return bad("duplicate boundary tags".into());
        }
        Ok(())
    }

    pub fn to_document(&self) -> MeshDocument {
        MeshDocument {
            radius: self.radius,
            nodes: self.nodes.clone(),
            triangles: self.triangles.clone(),
            gamma1: self.gamma1.iter().map(|e| e.nodes).collect(),
            gamma2: self.gamma2.clone(),
            grading: self.grading,
            h_max: self.h_max,
        }
    }

    pub fn from_document(doc: MeshDocument) -> Result<Self> {
        let gamma1 = doc
            .gamma1
            .iter()
            .map(|&[a, b]| {
                if a >= doc.nodes.len() || b >= doc.nodes.len() {
                    return Err(Error::InvalidMesh(format!("gamma1 edge ({a}, {b}) references a missing node")));
                }
                Ok(gamma1_edge(&doc.nodes, a, b))
            })
            .collect::<Result<Vec<_>>>()?;
        if doc.gamma2.iter().flatten().any(|&v| v >= doc.nodes.len()) {
            return Err(Error::InvalidMesh("gamma2 edge references a missing node".into()));
        }
        let mut mesh = HalfDiskMesh {
            radius: doc.radius,
            rings: Vec::new(),
            nodes: doc.nodes,
            triangles: doc.triangles,
            gamma1,
            gamma2: doc.gamma2,
            grading: doc.grading,
            h_max: doc.h_max,
            locator: Locator::default(),
        };
        mesh.validate()?;
        mesh.rings = ring_set(&mesh);
        mesh.locator = Locator::build(&mesh);
        Ok(mesh)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(text)?)
    }

    /// Triangle containing `p` and its barycentric coordinates.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        self.locator.locate(self, p)
    }

    /// P1 interpolation of nodal `values` at `p`.
    pub fn interpolate(&self, values: &[f64], p: [f64; 2]) -> Option<f64> {
        let (t, w) = self.locate(p)?;
        let tri = self.triangles[t];
        Some((0..3).map(|k| w[k] * values[tri[k]]).sum())
    }
}

fn ring_set(mesh: &HalfDiskMesh) -> Vec<f64> {
    let mut r: Vec<f64> = mesh.gamma1.iter().flat_map(|e| e.s).filter(|&s| s > 0.0).collect();
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

/// Bins triangles on a (ln r, angle) grid so that point location stays cheap on
/// meshes whose element size spans many orders of magnitude.
#[derive(Debug, Clone, Default, PartialEq)]
struct Locator {
    ln_lo: f64,
    ln_step: f64,
    n_ln: usize,
    n_ang: usize,
    offsets: Vec<usize>,
    items: Vec<usize>,
}

impl Locator {
    fn build(mesh: &HalfDiskMesh) -> Self {
        let r_small = mesh
            .nodes
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .filter(|&r| r > 0.0)
            .fold(f64::INFINITY, f64::min);
        let ln_lo = r_small.ln() - 1.0;
        let ln_hi = mesh.radius.ln() + 1e-9;
        let ln_step = 0.1;
        let n_ln = (((ln_hi - ln_lo) / ln_step).ceil() as usize).max(1);
        let n_ang = 32;
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n_ln * n_ang];
        for (ti, t) in mesh.triangles.iter().enumerate() {
            let pts = t.map(|i| mesh.nodes[i]);
            let rs = pts.map(|p| p[0].hypot(p[1]));
            let touches_origin = rs.iter().any(|&r| r == 0.0);
            let r_hi = rs.iter().cloned().fold(0.0, f64::max);
            // nearest point of the triangle to the origin can be on an edge
            let r_lo = if touches_origin { 0.0 } else { min_edge_distance(&pts) };
            let i_lo = if r_lo > 0.0 { Self::ln_index(ln_lo, ln_step, n_ln, r_lo) } else { 0 };
            let i_hi = Self::ln_index(ln_lo, ln_step, n_ln, r_hi);
            let (a_lo, a_hi) = if touches_origin {
                let angs: Vec<f64> = pts.iter().filter(|p| p[0] != 0.0 || p[1] != 0.0).map(|p| angle(*p)).collect();
                (angs.iter().cloned().fold(PI, f64::min), angs.iter().cloned().fold(0.0, f64::max))
            } else {
                let angs = pts.map(angle);
                (angs.iter().cloned().fold(PI, f64::min), angs.iter().cloned().fold(0.0, f64::max))
            };
            let j_lo = Self::ang_index(n_ang, a_lo);
            let j_hi = Self::ang_index(n_ang, a_hi);
            for i in i_lo..=i_hi {
                for j in j_lo..=j_hi {
                    buckets[i * n_ang + j].push(ti);
                }
            }
        }
        let mut offsets = vec![0];
        let mut items = Vec::new();
        for b in buckets {
            items.extend(b);
            offsets.push(items.len());
        }
        Locator { ln_lo, ln_step, n_ln, n_ang, offsets, items }
    }

    fn ln_index(ln_lo: f64, ln_step: f64, n_ln: usize, r: f64) -> usize {
        (((r.ln() - ln_lo) / ln_step).floor().max(0.0) as usize).min(n_ln - 1)
    }

    fn ang_index(n_ang: usize, a: f64) -> usize {
        ((a / PI * n_ang as f64).floor().max(0.0) as usize).min(n_ang - 1)
    }

    fn locate(&self, mesh: &HalfDiskMesh, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        if self.n_ln == 0 {
            return None;
        }
        let r = p[0].hypot(p[1]);
        if r == 0.0 {
            let o = mesh.origin_node()?;
            let t = mesh.triangles.iter().position(|t| t.contains(&o))?;
            let w = std::array::from_fn(|k| if mesh.triangles[t][k] == o { 1.0 } else { 0.0 });
            return Some((t, w));
        }
        let i = Self::ln_index(self.ln_lo, self.ln_step, self.n_ln, r);
        let j = Self::ang_index(self.n_ang, angle(p));
        let bucket = &self.items[self.offsets[i * self.n_ang + j]..self.offsets[i * self.n_ang + j + 1]];
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in bucket {
            let w = barycentric(mesh, mesh.triangles[t], p);
            let worst = w.iter().cloned().fold(f64::INFINITY, f64::min);
            if best.as_ref().map_or(true, |b| worst > b.2) {
                best = Some((t, w, worst));
            }
        }
        let (t, w, worst) = best?;
        (worst >= -1e-10).then_some((t, w))
    }
}

fn angle(p: [f64; 2]) -> f64 {
    p[1].atan2(p[0]).clamp(0.0, PI)
}

fn min_edge_distance(pts: &[[f64; 2]; 3]) -> f64 {
    (0..3)
        .map(|k| {
            let (a, b) = (pts[k], pts[(k + 1) % 3]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let t = (-(a[0] * d[0] + a[1] * d[1]) / len2).clamp(0.0, 1.0);
            (a[0] + t * d[0]).hypot(a[1] + t * d[1])
        })
        .fold(f64::INFINITY, f64::min)
}

fn barycentric(mesh: &HalfDiskMesh, t: [usize; 3], p: [f64; 2]) -> [f64; 3] {
    let [a, b, c] = t.map(|i| mesh.nodes[i]);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((b[0] - p[0]) * (c[1] - p[1]) - (c[0] - p[0]) * (b[1] - p[1])) / det;
    let l2 = ((c[0] - p[0]) * (a[1] - p[1]) - (a[0] - p[0]) * (c[1] - p[1])) / det;
    [l1, l2, 1.0 - l1 - l2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ungraded_area() {
        let m = build_half_disk_mesh(1.0, 0.25, 0.25, 2.0).unwrap();
        m.validate().unwrap();
        assert!((m.total_area() - PI / 2.0).abs() < 0.02 * PI / 2.0);
    }

    #[test]
    fn origin_edge_has_grading_scale() {
        let m = build_half_disk_mesh(1.0, 0.1, 1e-4, 1.5).unwrap();
        let l = m.origin_gamma1_length();
        assert!((1e-4..=1.5e-4).contains(&l), "{l}");
    }

    #[test]
    fn euler_relation() {
        for (h, r, q) in [(0.25, 0.25, 2.0), (0.1, 1e-4, 1.5), (0.05, 1e-6, 1.2)] {
            let m = build_half_disk_mesh(1.0, h, r, q).unwrap();
            let (v, e, f) = (m.node_count() as i64, m.edge_count() as i64, m.triangles.len() as i64);
            assert_eq!(v - e + f, 1);
        }
    }

    #[test]
    fn geometric_growth_along_diameter() {
        let m = build_half_disk_mesh(1.0, 0.1, 1e-4, 1.5).unwrap();
        let pos: Vec<&Gamma1Edge> = m.gamma1.iter().filter(|e| e.s[0] >= 0.0).collect();
        let lens: Vec<f64> = pos.iter().map(|e| e.s[1] - e.s[0]).collect();
        // after the origin edge the steps grow by `ratio` until they would exceed h_max
        let mut j = 2;
        while j < lens.len() && lens[j] < 0.1 * 0.99 && lens[j - 1] * 1.5 < 0.1 {
            assert!((lens[j] / lens[j - 1] - 1.5).abs() < 1e-9, "{j}: {} {}", lens[j - 1], lens[j]);
            j += 1;
        }
        assert!(j > 10);
        assert!(lens.iter().all(|&l| l <= 0.1 * (1.0 + 1e-9)));
    }

    #[test]
    fn area_converges_quadratically() {
        let hs = [0.2, 0.1, 0.05, 0.025];
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| (build_half_disk_mesh(1.0, h, 1e-3, 1.5).unwrap().total_area() - PI / 2.0).abs())
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "{errs:?}");
        }
    }

    #[test]
    fn abscissa() {
        let m = build_half_disk_mesh(1.0, 0.25, 0.25, 2.0).unwrap();
        assert_eq!(abscissa_of_gamma1_point(&m, [0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(abscissa_of_gamma1_point(&m, [1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(abscissa_of_gamma1_point(&m, [-0.5, 0.0]).unwrap(), -0.5);
        assert!(matches!(abscissa_of_gamma1_point(&m, [0.2, 0.1]), Err(Error::OffDiameter { .. })));
        assert!(abscissa_of_gamma1_point(&m, [1.5, 0.0]).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        for (r, h, rmin, q) in [
            (0.0, 0.1, 0.01, 1.5),
            (1.0, 0.5, 0.01, 1.5),
            (1.0, 0.1, 0.2, 1.5),
            (1.0, 0.1, 0.01, 1.0),
            (1.0, 0.1, 0.01, 2.5),
            (1.0, 0.1, 0.0, 1.5),
        ] {
            let err = build_half_disk_mesh(r, h, rmin, q).unwrap_err().to_string();
            assert!(err.contains("violated"), "{err}");
        }
    }

    #[test]
    fn refinement_keeps_boundary_tags() {
        let coarse = build_half_disk_mesh(1.0, 0.2, 0.02, 1.5).unwrap();
        let fine = build_half_disk_mesh(1.0, 0.1, 0.01, 1.5).unwrap();
        for m in [&coarse, &fine] {
            for e in &m.gamma1 {
                assert!(e.nodes.iter().all(|&v| m.nodes[v][1] == 0.0));
            }
            for e in &m.gamma2 {
                assert!(e.iter().all(|&v| (m.nodes[v][0].hypot(m.nodes[v][1]) - 1.0).abs() < 1e-12));
            }
            // both ends of the diameter belong to gamma1 and gamma2
            let ends: Vec<usize> = m.gamma2.iter().flatten().copied().filter(|&v| m.nodes[v][1] == 0.0).collect();
            assert_eq!(ends.len(), 2);
        }
    }

    #[test]
    fn json_round_trip() {
        let m = build_half_disk_mesh(1.0, 0.25, 0.25, 2.0).unwrap();
        let back = HalfDiskMesh::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back.nodes, m.nodes);
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.gamma1, m.gamma1);
        assert_eq!(back.gamma2, m.gamma2);
        assert_eq!(back.to_json().unwrap(), m.to_json().unwrap());
    }

    #[test]
    fn import_rejects_broken_mesh() {
        let m = build_half_disk_mesh(1.0, 0.25, 0.25, 2.0).unwrap();
        let mut doc = m.to_document();
        doc.gamma2.pop();
        assert!(HalfDiskMesh::from_document(doc).is_err());
        let mut doc = m.to_document();
        doc.triangles[0].swap(0, 1);
        assert!(HalfDiskMesh::from_document(doc).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_linear_functions() {
        let m = build_half_disk_mesh(1.0, 0.1, 1e-5, 1.3).unwrap();
        let vals: Vec<f64> = m.nodes.iter().map(|p| 2.0 * p[0] - 3.0 * p[1] + 0.5).collect();
        for &r in &[3e-5, 1e-3, 0.05, 0.3, 0.9] {
            for k in 0..=20 {
                let a = PI * k as f64 / 20.0;
                let p = [r * a.cos(), r * a.sin()];
                let v = m.interpolate(&vals, p).expect("point inside");
                assert!((v - (2.0 * p[0] - 3.0 * p[1] + 0.5)).abs() < 1e-12);
            }
        }
        assert!(m.locate([0.0, 1.5]).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_meshes_are_valid(h in 0.03f64..0.25, rmin_frac in 1e-4f64..1.0, q in 1.1f64..2.0) {
            let m = build_half_disk_mesh(1.0, h, h * rmin_frac, q).unwrap();
            prop_assert!(m.validate().is_ok());
            prop_assert!((m.total_area() - PI / 2.0).abs() < 0.05);
            prop_assert_eq!(m.node_count() as i64 - m.edge_count() as i64 + m.triangles.len() as i64, 1);
        }
    }
}
