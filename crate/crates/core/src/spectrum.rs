//! Spectral results shared by the semi-analytic oracle and the finite-element solver.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Which separated family (oracle) or solver (FEM) produced an eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Angular mode e^{b0 φ}, radial order i b0; depends on the extension parameter.
    Mode0,
    /// Angular index k ≥ 1 (A₀(θ)) or k ≥ 0 (pure Neumann half-disk); θ-independent.
    Regular { k: usize },
    /// Discrete eigenvalue of an assembled operator.
    Fem,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Mode0 => write!(f, "mode0"),
            Family::Regular { k } => write!(f, "k{k}"),
            Family::Fem => write!(f, "fem"),
        }
    }
}

/// What the spectrum is parametrized by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", content = "value", rename_all = "snake_case")]
pub enum SpectralParameter {
    Theta(f64),
    Eps(f64),
    Neumann,
}

/// Coefficients of the outgoing (c_in, on S⁻) and incoming (c_out, on S⁺) singular parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InOutCoefficients {
    pub c_in: Complex64,
    pub c_out: Complex64,
    /// Relative least-squares residual of the fit that produced them.
    pub fit_residual: f64,
}

impl InOutCoefficients {
    /// |c_in| / |c_out| − 1.
    pub fn modulus_mismatch(&self) -> f64 {
        self.c_in.norm() / self.c_out.norm() - 1.0
    }

    /// arg(c_in / c_out) in [0, 2π).
    pub fn phase(&self) -> f64 {
        crate::wrap_angle((self.c_in / self.c_out).arg())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub value: f64,
    pub family: Family,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<InOutCoefficients>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub parameter: SpectralParameter,
    /// Sorted ascending.
    pub eigenpairs: Vec<Eigenpair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_id: Option<String>,
    pub solver: String,
    /// Nodal eigenvectors (FEM only), aligned with `eigenpairs`; not serialized.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
}

impl SpectralResult {
    pub fn new(parameter: SpectralParameter, solver: impl Into<String>) -> Self {
        Self { parameter, eigenpairs: Vec::new(), mesh_id: None, solver: solver.into(), eigenvectors: Vec::new() }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigenpairs.iter().map(|e| e.value).collect()
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.eigenpairs.iter().map(|e| e.residual).collect()
    }

    pub fn values_of(&self, family: Family) -> Vec<f64> {
        self.eigenpairs.iter().filter(|e| e.family == family).map(|e| e.value).collect()
    }

    pub fn len(&self) -> usize {
        self.eigenpairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenpairs.is_empty()
    }

    pub(crate) fn sort(&mut self) {
        if self.eigenvectors.len() == self.eigenpairs.len() && !self.eigenvectors.is_empty() {
            let mut idx: Vec<usize> = (0..self.eigenpairs.len()).collect();
            idx.sort_by(|&a, &b| self.eigenpairs[a].value.total_cmp(&self.eigenpairs[b].value));
            self.eigenpairs = idx.iter().map(|&i| self.eigenpairs[i].clone()).collect();
            self.eigenvectors = idx.iter().map(|&i| std::mem::take(&mut self.eigenvectors[i])).collect();
        } else {
            self.eigenpairs.sort_by(|a, b| a.value.total_cmp(&b.value));
        }
    }
}
