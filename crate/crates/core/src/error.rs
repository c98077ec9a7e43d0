use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("point ({x}, {y}) is not on the diameter (distance {distance:.3e})")]
    OffDiameter { x: f64, y: f64, distance: f64 },

    #[error("radial kernel did not converge within {max_terms} terms at zeta = {zeta}")]
    KernelNonConvergence { zeta: f64, max_terms: usize },

    #[error("radial kernel argument |zeta| = {0} exceeds the supported range 4000")]
    KernelDomain(f64),

    #[error("mode index {index} out of range (spectrum holds {len} modes)")]
    ModeIndex { index: usize, len: usize },

    #[error("Q(lambda R^2) vanishes at lambda = {lambda}: trapped-mode candidate")]
    TrappedModeCandidate { lambda: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("factorization broke down at shift {shift} (pivot {pivot:.3e} at row {row})")]
    FactorizationBreakdown { shift: f64, row: usize, pivot: f64 },

    #[error("window certification failed on [{lo}, {hi}]: inertia counts {expected}, solver found {found}")]
    Certification { lo: f64, hi: f64, expected: usize, found: usize },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("coefficient fit is ill-conditioned: {0}")]
    IllConditionedFit(String),

    #[error("objective is flat: {0}")]
    FlatObjective(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
