use thiserror::Error;

/// Errors raised by state construction, operator construction and the
/// interferometer pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Fock dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("Fock level {level} is out of range for dimension {dim}")]
    LevelOutOfRange { level: usize, dim: usize },
    #[error("truncation risk: |amplitude|^2 = {amplitude_sq} exceeds 0.25 * {dim}")]
    TruncationRisk { amplitude_sq: f64, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("state has zero norm and cannot be normalized")]
    ZeroNorm,
    #[error("amplitude {0:e} outside the dual-rail subspace")]
    InvalidSubspace(f64),
    #[error("post-selection probability {0:e} is below the 1e-12 threshold")]
    DegeneratePostselection(f64),
    #[error("grid violates the sampling guard: h * 2Z = {0} >= pi")]
    NyquistViolation(f64),
    #[error("no registered detection events")]
    InsufficientStatistics,
    #[error("invalid density matrix: {0}")]
    InvalidDensity(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("interferometric phase xi = {0} is not balanced to zero")]
    PhaseNotBalanced(f64),
    #[error("operator acts on {0:?}, which is not a mode of this state")]
    UnsupportedMode(crate::fock::Mode),
}

pub type Result<T> = core::result::Result<T, Error>;
