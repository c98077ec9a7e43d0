//! ε-sweeps of the regularized operator and the log-periodic wandering law.
//!
//! For ε on a geometric grid the FEM spectrum of `A^ε` is compared with the
//! spectrum of the extension `A₀(θ_ε)`, `θ_ε = θ* − 2 b0 ln ε`. The single
//! offset θ* is fitted; the law is then falsifiable through the residual
//! mismatch, the agreement of offsets fitted on disjoint parts of the sweep,
//! and the period `π/b0` in `ln ε`.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fem::{assemble, extract_in_out, matching_radii, solve_window, RobinProfile, SolverOptions};
use crate::mesh::build_half_disk_mesh;
use crate::oracle::{mode0_eigenvalues, regular_eigenvalues, track_mode0, SingularBasis};
use crate::spectrum::{Family, SpectralResult};
use crate::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsGrid {
    pub eps_max: f64,
    pub periods: usize,
    pub samples_per_period: usize,
}

impl EpsGrid {
    /// `ε_j = eps_max · e^{−j (π/b0) / samples_per_period}`, j = 0..=periods·samples_per_period.
    pub fn values(&self, b0: f64) -> Vec<f64> {
        let step = (PI / b0) / self.samples_per_period as f64;
        (0..=self.periods * self.samples_per_period).map(|j| self.eps_max * (-(j as f64) * step).exp()).collect()
    }
}

fn default_radius() -> f64 {
    1.0
}
fn default_h_max() -> f64 {
    0.05
}
fn default_ratio_target() -> f64 {
    1.05
}
fn default_rmin_factor() -> f64 {
    0.1
}
fn default_radii() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Template profile; its ε is replaced by each grid value.
    pub profile: RobinProfile,
    #[serde(rename = "R", default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_h_max")]
    pub h_max: f64,
    pub window: (f64, f64),
    pub grid: EpsGrid,
    /// Upper bound of the grading ratio; the actual ratio divides the ε step evenly.
    #[serde(default = "default_ratio_target")]
    pub ratio_target: f64,
    /// `r_min = rmin_factor · ε`.
    #[serde(default = "default_rmin_factor")]
    pub rmin_factor: f64,
    /// Number of radii in the matching annulus for coefficient extraction.
    #[serde(default = "default_radii")]
    pub matching_radii: usize,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl SweepConfig {
    pub fn new(profile: RobinProfile, window: (f64, f64), grid: EpsGrid) -> Self {
        Self {
            profile,
            radius: default_radius(),
            h_max: default_h_max(),
            window,
            grid,
            ratio_target: default_ratio_target(),
            rmin_factor: default_rmin_factor(),
            matching_radii: default_radii(),
            solver: SolverOptions::default(),
        }
    }

    pub fn b0(&self) -> f64 {
        self.profile.b0()
    }

    /// Grading ratio `e^{Δ/m}` with Δ the ε step in ln ε and m the smallest integer
    /// keeping the ratio below `ratio_target`; ring radii of neighbouring ε coincide.
    pub fn grading_ratio(&self) -> f64 {
        let step = (PI / self.b0()) / self.grid.samples_per_period as f64;
        let m = (step / self.ratio_target.ln()).ceil().max(1.0);
        (step / m).exp()
    }

    fn validate(&self) -> Result<()> {
        if !(self.grid.eps_max > 0.0 && self.grid.eps_max <= self.radius / 100.0) {
            return Err(invalid(format!("eps_max <= R/100 violated: eps_max = {}", self.grid.eps_max)));
        }
        if self.grid.samples_per_period < 8 {
            return Err(invalid(format!(
                "samples_per_period >= 8 violated: {}",
                self.grid.samples_per_period
            )));
        }
        if self.grid.periods == 0 {
            return Err(invalid("periods must be at least 1"));
        }
        if !(self.rmin_factor > 0.0 && self.rmin_factor <= 0.1) {
            return Err(invalid(format!("rmin_factor must lie in (0, 0.1], got {}", self.rmin_factor)));
        }
        if !(self.ratio_target > 1.0 && self.ratio_target <= 2.0) {
            return Err(invalid(format!("ratio_target must lie in (1, 2], got {}", self.ratio_target)));
        }
        if !(self.window.0 < self.window.1) {
            return Err(invalid("window must be a bounded interval"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub index: usize,
    pub eps: f64,
    pub ln_eps: f64,
    pub mesh_id: String,
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectralResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub config: SweepConfig,
    pub ratio: f64,
    /// Strictly decreasing in ε.
    pub entries: Vec<SweepEntry>,
    /// `π / b0`.
    pub period: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_offset: Option<OffsetFit>,
}

impl SweepTable {
    /// A table from precomputed spectra, e.g. oracle data for self-tests.
    pub fn from_spectra(config: SweepConfig, epsilons: &[f64], spectra: Vec<SpectralResult>) -> Result<Self> {
        if epsilons.len() != spectra.len() {
            return Err(invalid("one spectrum per epsilon is required"));
        }
        if epsilons.windows(2).any(|w| !(w[1] < w[0])) || epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(invalid("epsilons must be positive and strictly decreasing"));
        }
        let entries = epsilons
            .iter()
            .zip(spectra)
            .enumerate()
            .map(|(index, (&eps, s))| SweepEntry {
                index,
                eps,
                ln_eps: eps.ln(),
                mesh_id: s.mesh_id.clone().unwrap_or_default(),
                nodes: 0,
                spectrum: Some(s),
                error: None,
            })
            .collect();
        let period = PI / config.b0();
        Ok(Self { ratio: config.grading_ratio(), config, entries, period, theta_offset: None })
    }

    pub fn samples_per_period(&self) -> usize {
        self.config.grid.samples_per_period
    }

    /// Every `stride`-th entry; the result is the sweep on the coarser grid.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        let s = self.samples_per_period();
        if stride == 0 || s % stride != 0 {
            return Err(invalid(format!("stride {stride} does not divide samples_per_period {s}")));
        }
        let mut t = self.clone();
        t.config.grid.samples_per_period = s / stride;
        t.entries = self.entries.iter().step_by(stride).cloned().collect();
        for (i, e) in t.entries.iter_mut().enumerate() {
            e.index = i;
        }
        t.theta_offset = None;
        Ok(t)
    }

    pub fn usable(&self) -> impl Iterator<Item = (&SweepEntry, &SpectralResult)> {
        self.entries.iter().filter_map(|e| e.spectrum.as_ref().map(|s| (e, s)))
    }

    /// `θ_ε = θ* − 2 b0 ln ε (mod 2π)`.
    pub fn theta_eps(&self, theta_star: f64, eps: f64) -> f64 {
        wrap_angle(theta_star - 2.0 * self.config.b0() * eps.ln())
    }
}

/// FEM spectra of `A^ε` on the configured ε grid. Failed solves are recorded as gaps.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepTable> {
    config.validate()?;
    let b0 = config.b0();
    let ratio = config.grading_ratio();
    let epsilons = config.grid.values(b0);
    let basis = SingularBasis::new(b0, 0.0)?;
    let entries: Vec<SweepEntry> = epsilons
        .par_iter()
        .enumerate()
        .map(|(index, &eps)| {
            let mut entry = SweepEntry {
                index,
                eps,
                ln_eps: eps.ln(),
                mesh_id: String::new(),
                nodes: 0,
                spectrum: None,
                error: None,
            };
            let solved = (|| -> Result<SpectralResult> {
                let mesh = build_half_disk_mesh(config.radius, config.h_max, config.rmin_factor * eps, ratio)?;
                entry.mesh_id = mesh.id();
                entry.nodes = mesh.node_count();
                let profile = config.profile.with_eps(eps)?;
                let pair = assemble(&mesh, &profile)?;
                let mut spectrum = solve_window(&pair, config.window, &config.solver)?;
                if let Ok(radii) = matching_radii(eps, config.radius, config.matching_radii) {
                    let coeffs = extract_in_out(&spectrum, &mesh, &basis, &radii)?;
                    for (p, c) in spectrum.eigenpairs.iter_mut().zip(coeffs) {
                        p.coefficients = Some(c);
                    }
                }
                spectrum.eigenvectors.clear();
                Ok(spectrum)
            })();
            match solved {
                Ok(s) => entry.spectrum = Some(s),
                Err(e) => entry.error = Some(e.to_string()),
            }
            entry
        })
        .collect();
    Ok(SweepTable { config: config.clone(), ratio, entries, period: PI / b0, theta_offset: None })
}

/// Eigenvalues of `A₀(θ)` in a padded window: θ-dependent mode-0 roots plus cached regular families.
#[derive(Debug, Clone)]
pub struct ExtensionOracle {
    pub radius: f64,
    pub b0: f64,
    pub window: (f64, f64),
    regular: Vec<(f64, Family)>,
}

impl ExtensionOracle {
    pub fn new(radius: f64, b0: f64, window: (f64, f64), k_angular_max: usize) -> Result<Self> {
        let mut regular = Vec::new();
        for k in 1..=k_angular_max {
            for l in regular_eigenvalues(k, window, radius)? {
                regular.push((l, Family::Regular { k }));
            }
        }
        Ok(Self { radius, b0, window, regular })
    }

    /// The oracle for a sweep: its window padded by `pad` on both sides.
    pub fn for_table(table: &SweepTable, pad: f64) -> Result<Self> {
        let (lo, hi) = table.config.window;
        Self::new(table.config.radius, table.config.b0(), (lo - pad, hi + pad), 8)
    }

    pub fn spectrum(&self, theta: f64) -> Result<Vec<(f64, Family)>> {
        let mut all: Vec<(f64, Family)> = mode0_eigenvalues(theta, self.window, self.radius, self.b0)?
            .into_iter()
            .map(|l| (l, Family::Mode0))
            .collect();
        all.extend(self.regular.iter().copied());
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(all)
    }
}

fn nearest(spec: &[(f64, Family)], l: f64) -> Option<(f64, Family)> {
    spec.iter().copied().min_by(|a, b| (a.0 - l).abs().total_cmp(&(b.0 - l).abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchRow {
    pub eps: f64,
    pub ln_eps: f64,
    pub theta_eps: f64,
    pub lambda: f64,
    pub oracle_lambda: f64,
    pub family: Family,
    pub mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetFit {
    pub theta_star: f64,
    /// Summed squared mismatch at θ*.
    pub objective: f64,
    pub mean_mismatch: f64,
    /// Mean spacing of consecutive oracle eigenvalues inside the window.
    pub mean_spacing: f64,
    /// Mean mismatch per period of the sweep, in order of decreasing ε.
    pub period_means: Vec<f64>,
    /// Adjacent-sample moves of mode-0 branches that go up instead of down.
    pub branch_violations: usize,
    pub rows: Vec<MismatchRow>,
}

fn objective(oracle: &ExtensionOracle, data: &[(f64, Vec<f64>)], b0: f64, theta_star: f64) -> Result<f64> {
    let mut total = 0.0;
    for (eps, values) in data {
        let spec = oracle.spectrum(wrap_angle(theta_star - 2.0 * b0 * eps.ln()))?;
        for &l in values {
            let (o, _) = nearest(&spec, l).ok_or_else(|| Error::InsufficientData("oracle window is empty".into()))?;
            total += (l - o) * (l - o);
        }
    }
    Ok(total)
}

fn fit_data(table: &SweepTable, indices: Option<&[usize]>) -> Vec<(usize, f64, Vec<f64>)> {
    table
        .usable()
        .filter(|(e, _)| indices.is_none_or(|ix| ix.contains(&e.index)))
        .map(|(e, s)| (e.index, e.eps, s.eigenvalues()))
        .collect()
}

/// Fits θ* over every usable entry.
pub fn fit_offset(table: &SweepTable, oracle: &ExtensionOracle) -> Result<OffsetFit> {
    fit_offset_on(table, oracle, None)
}

/// Fits θ* using only entries whose index is listed in `indices` (all when `None`).
pub fn fit_offset_on(table: &SweepTable, oracle: &ExtensionOracle, indices: Option<&[usize]>) -> Result<OffsetFit> {
    let b0 = table.config.b0();
    let rows = fit_data(table, indices);
    if rows.len() < 8 {
        return Err(Error::InsufficientData(format!("{} usable spectra, need at least 8", rows.len())));
    }
    let data: Vec<(f64, Vec<f64>)> = rows.iter().map(|(_, e, v)| (*e, v.clone())).collect();
    let n_grid = 512;
    let grid: Vec<f64> = (0..n_grid)
        .into_par_iter()
        .map(|i| objective(oracle, &data, b0, TAU * i as f64 / n_grid as f64))
        .collect::<Result<_>>()?;
    let (best, &fbest) = grid.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty grid");
    let fmax = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(fmax - fbest > 1e-12 * fmax.max(1e-300)) {
        return Err(Error::FlatObjective(format!(
            "objective varies by {:.3e} over the theta grid; widen the window or refine the meshes",
            fmax - fbest
        )));
    }
    // golden-section search on the bracketing grid cells
    let h = TAU / n_grid as f64;
    let (mut a, mut b) = (best as f64 * h - h, best as f64 * h + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = objective(oracle, &data, b0, c)?;
    let mut fd = objective(oracle, &data, b0, d)?;
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(oracle, &data, b0, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = objective(oracle, &data, b0, d)?;
        }
    }
    let theta_star = wrap_angle(0.5 * (a + b));
    let mut f_star = objective(oracle, &data, b0, theta_star)?;
    let theta_star = if f_star <= fbest {
        theta_star
    } else {
        f_star = fbest;
        best as f64 * h
    };
    summarize(table, oracle, &rows, theta_star, f_star)
}

fn summarize(
    table: &SweepTable,
    oracle: &ExtensionOracle,
    rows: &[(usize, f64, Vec<f64>)],
    theta_star: f64,
    objective: f64,
) -> Result<OffsetFit> {
    let (lo, hi) = table.config.window;
    let s = table.samples_per_period();
    let mut out = Vec::new();
    let mut spacings = Vec::new();
    let mut per_period: Vec<(f64, usize)> = vec![(0.0, 0); table.config.grid.periods.max(1)];
    for (index, eps, values) in rows {
        let theta = table.theta_eps(theta_star, *eps);
        let spec = oracle.spectrum(theta)?;
        let inside: Vec<f64> = spec.iter().map(|p| p.0).filter(|&l| l >= lo && l <= hi).collect();
        if inside.len() >= 2 {
            spacings.push((inside[inside.len() - 1] - inside[0]) / (inside.len() - 1) as f64);
        }
        let p = (index / s).min(per_period.len() - 1);
        for &l in values {
            let (o, fam) = nearest(&spec, l).ok_or_else(|| Error::InsufficientData("oracle window is empty".into()))?;
            let mm = (l - o).abs();
            per_period[p].0 += mm;
            per_period[p].1 += 1;
            out.push(MismatchRow {
                eps: *eps,
                ln_eps: eps.ln(),
                theta_eps: theta,
                lambda: l,
                oracle_lambda: o,
                family: fam,
                mismatch: mm,
            });
        }
    }
    let mean_mismatch = out.iter().map(|r| r.mismatch).sum::<f64>() / out.len().max(1) as f64;
    let mean_spacing = spacings.iter().sum::<f64>() / spacings.len().max(1) as f64;
    let branch_violations = branch_violations(table, oracle, &out)?;
    Ok(OffsetFit {
        theta_star,
        objective,
        mean_mismatch,
        mean_spacing,
        period_means: per_period.iter().map(|(s, n)| if *n > 0 { s / *n as f64 } else { f64::NAN }).collect(),
        branch_violations,
        rows: out,
    })
}

/// Counts mode-0 branches that move up between adjacent samples. The oracle branch through
/// each mode-0 eigenvalue is continued to the next θ_ε and the nearest FEM eigenvalue there
/// is taken as its successor; branches leaving the window are not counted.
fn branch_violations(table: &SweepTable, oracle: &ExtensionOracle, rows: &[MismatchRow]) -> Result<usize> {
    let (lo, hi) = table.config.window;
    let mut eps_values: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    eps_values.dedup();
    let mut violations = 0;
    for w in eps_values.windows(2) {
        let here: Vec<&MismatchRow> = rows.iter().filter(|r| r.eps == w[0]).collect();
        let next: Vec<&MismatchRow> = rows.iter().filter(|r| r.eps == w[1]).collect();
        if next.is_empty() {
            continue;
        }
        let theta_next = next[0].theta_eps;
        for r in here.iter().filter(|r| r.family == Family::Mode0) {
            let predicted = track_mode0(r.oracle_lambda, theta_next, oracle.radius, oracle.b0)?;
            if predicted < lo || predicted > hi {
                continue;
            }
            let succ = next
                .iter()
                .min_by(|a, b| (a.lambda - predicted).abs().total_cmp(&(b.lambda - predicted).abs()))
                .expect("nonempty");
            if succ.lambda > r.lambda {
                violations += 1;
            }
        }
    }
    Ok(violations)
}

/// θ* fitted separately on the first and second half of the sweep.
pub fn fit_offset_halves(table: &SweepTable, oracle: &ExtensionOracle) -> Result<(OffsetFit, OffsetFit)> {
    let n = table.entries.len();
    let first: Vec<usize> = (0..n / 2).collect();
    let second: Vec<usize> = (n / 2..n).collect();
    Ok((fit_offset_on(table, oracle, Some(&first))?, fit_offset_on(table, oracle, Some(&second))?))
}

/// Distance on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub eps: f64,
    pub eps_shifted: f64,
    pub matched: usize,
    pub max_rel: f64,
    pub mean_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPeriodicityReport {
    pub tol: f64,
    pub comparisons: Vec<SpectrumComparison>,
    pub max_rel: f64,
    pub mean_rel: f64,
    pub pass: bool,
    /// The same statistic for spectra half a period apart.
    pub control_mean_rel: f64,
    /// `control_mean_rel / mean_rel`.
    pub control_ratio: f64,
}

/// Relative discrepancy of two sorted spectra matched in order, with the index offset
/// that minimizes the mean over the overlap.
pub fn compare_spectra(a: &[f64], b: &[f64]) -> Option<(usize, f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let need = a.len().min(b.len()).saturating_sub(1).max(1);
    let mut best: Option<(usize, f64, f64)> = None;
    for k in -(a.len() as i64 - 1)..=(b.len() as i64 - 1) {
        let pairs: Vec<(f64, f64)> = (0..a.len() as i64)
            .filter_map(|i| {
                let j = i + k;
                (j >= 0 && (j as usize) < b.len()).then(|| (a[i as usize], b[j as usize]))
            })
            .collect();
        if pairs.len() < need {
            continue;
        }
        let rel: Vec<f64> = pairs.iter().map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0)).collect();
        let mean = rel.iter().sum::<f64>() / rel.len() as f64;
        let max = rel.iter().cloned().fold(0.0, f64::max);
        if best.is_none_or(|b| mean < b.2) {
            best = Some((pairs.len(), max, mean));
        }
    }
    best
}

fn compare_shifted(table: &SweepTable, shift: usize) -> Vec<SpectrumComparison> {
    let mut out = Vec::new();
    for (e, s) in table.usable() {
        let Some(t) = table.entries.get(e.index + shift) else { continue };
        let Some(ts) = &t.spectrum else { continue };
        if let Some((matched, max_rel, mean_rel)) = compare_spectra(&s.eigenvalues(), &ts.eigenvalues()) {
            out.push(SpectrumComparison { eps: e.eps, eps_shifted: t.eps, matched, max_rel, mean_rel });
        }
    }
    out
}

/// Compares spectra one period `π/b0` apart in `ln ε`, with a half-period control.
pub fn check_log_periodicity(table: &SweepTable, tol: f64) -> Result<LogPeriodicityReport> {
    let s = table.samples_per_period();
    if table.entries.len() < 2 * s + 1 {
        return Err(Error::InsufficientData(format!(
            "log-periodicity needs two periods ({} samples), table has {}",
            2 * s + 1,
            table.entries.len()
        )));
    }
    let comparisons = compare_shifted(table, s);
    if comparisons.is_empty() {
        return Err(Error::InsufficientData("no spectrum pairs one period apart".into()));
    }
    let control = compare_shifted(table, s / 2);
    let mean_rel = comparisons.iter().map(|c| c.mean_rel).sum::<f64>() / comparisons.len() as f64;
    let max_rel = comparisons.iter().map(|c| c.max_rel).fold(0.0, f64::max);
    let control_mean_rel = control.iter().map(|c| c.mean_rel).sum::<f64>() / control.len().max(1) as f64;
    Ok(LogPeriodicityReport {
        tol,
        max_rel,
        mean_rel,
        pass: mean_rel <= tol,
        control_mean_rel,
        control_ratio: if mean_rel > 0.0 { control_mean_rel / mean_rel } else { f64::INFINITY },
        comparisons,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub interval: (f64, f64),
    /// θ grid size (oracle) or number of ε samples (sweep).
    pub resolution: usize,
    pub points: usize,
    pub max_gap: f64,
}

fn max_gap(mut values: Vec<f64>, interval: (f64, f64)) -> f64 {
    let (lo, hi) = interval;
    if !(hi > lo) {
        return 0.0;
    }
    values.retain(|&v| v >= lo && v <= hi);
    values.push(lo);
    values.push(hi);
    values.sort_by(f64::total_cmp);
    values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Largest gap in `interval` left by the union of the spectra of `A₀(θ)` over an `n_theta` grid.
pub fn oracle_coverage(interval: (f64, f64), n_theta: usize, radius: f64, b0: f64, k_angular_max: usize) -> Result<CoverageReport> {
    if n_theta == 0 {
        return Err(invalid("theta grid must be nonempty"));
    }
    if !(interval.1 > interval.0) {
        return Ok(CoverageReport { interval, resolution: n_theta, points: 0, max_gap: 0.0 });
    }
    let oracle = ExtensionOracle::new(radius, b0, interval, k_angular_max)?;
    let union: Vec<f64> = (0..n_theta)
        .into_par_iter()
        .map(|i| oracle.spectrum(TAU * i as f64 / n_theta as f64))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .map(|p| p.0)
        .collect();
    Ok(CoverageReport { interval, resolution: n_theta, points: union.len(), max_gap: max_gap(union, interval) })
}

/// Largest gap in `interval` left by the union of all swept FEM spectra.
pub fn sweep_coverage(table: &SweepTable, interval: (f64, f64)) -> CoverageReport {
    let union: Vec<f64> = table.usable().flat_map(|(_, s)| s.eigenvalues()).collect();
    CoverageReport {
        interval,
        resolution: table.usable().count(),
        points: union.len(),
        max_gap: max_gap(union, interval),
    }
}

/// Writes one JSON file per ε plus the index `sweep.json` into `dir`; returns the file names.
pub fn write_sweep_dir(table: &SweepTable, dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for e in &table.entries {
        let name = format!("eps_{:03}.json", e.index);
        std::fs::write(dir.join(&name), serde_json::to_string_pretty(e)?)?;
        files.push(name);
    }
    #[derive(Serialize)]
    struct Manifest<'a> {
        config: &'a SweepConfig,
        ratio: f64,
        period: f64,
        epsilons: Vec<f64>,
        files: &'a [String],
        #[serde(skip_serializing_if = "Option::is_none")]
        theta_offset: Option<f64>,
    }
    let manifest = Manifest {
        config: &table.config,
        ratio: table.ratio,
        period: table.period,
        epsilons: table.entries.iter().map(|e| e.eps).collect(),
        files: &files,
        theta_offset: table.theta_offset.as_ref().map(|f| f.theta_star),
    };
    std::fs::write(dir.join("sweep.json"), serde_json::to_string_pretty(&manifest)?)?;
    files.push("sweep.json".into());
    Ok(files)
}

/// Reads a directory written by [`write_sweep_dir`].
pub fn read_sweep_dir(dir: &Path) -> Result<SweepTable> {
    #[derive(Deserialize)]
    struct Manifest {
        config: SweepConfig,
        ratio: f64,
        period: f64,
        files: Vec<String>,
    }
    let m: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join("sweep.json"))?)?;
    let entries = m
        .files
        .iter()
        .filter(|f| f.as_str() != "sweep.json")
        .map(|f| Ok(serde_json::from_str(&std::fs::read_to_string(dir.join(f))?)?))
        .collect::<Result<Vec<SweepEntry>>>()?;
    Ok(SweepTable { config: m.config, ratio: m.ratio, entries, period: m.period, theta_offset: None })
}

/// CSV with columns `eps, ln_eps, theta_eps, lambda, family, mismatch`.
pub fn write_mismatch_csv(fit: &OffsetFit, out: &mut impl Write) -> Result<()> {
    writeln!(out, "eps,ln_eps,theta_eps,lambda,family,mismatch")?;
    for r in &fit.rows {
        writeln!(
            out,
            "{:e},{:.12},{:.12},{:.12},{},{:e}",
            r.eps, r.ln_eps, r.theta_eps, r.lambda, r.family, r.mismatch
        )?;
    }
    Ok(())
}
