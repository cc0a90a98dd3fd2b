use alloc::string::String;
use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("at least 2 cells are required, found {0}")]
    TooFewCells(usize),

    #[error("vector is not of unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid counts: {0}")]
    InvalidCounts(String),

    #[error("invalid anchor: {0}")]
    InvalidAnchor(&'static str),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("inputs are not orthogonal: |<{which}>| = {value:e}")]
    NonOrthogonalInputs { which: &'static str, value: f64 },

    #[error("provenance mismatch: {0}")]
    ProvenanceMismatch(&'static str),

    #[error("component vector has kind {found}, expected {expected}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("pooled cell {0} is empty; merge cells before testing")]
    EmptyPooledCell(usize),

    #[error("parameter {theta} lies outside the domain ({lo}, {hi})")]
    DomainError { theta: f64, lo: f64, hi: f64 },

    #[error("no sign change of the score in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("score is degenerate: Fisher information {0:e}")]
    DegenerateScore(f64),

    #[error("no convergence after {iterations} iterations (theta {theta}, score {score:e})")]
    NoConvergence {
        iterations: usize,
        theta: f64,
        score: f64,
    },

    #[error("degenerate model: cell {cell} has probability {prob:e}")]
    DegenerateModel { cell: usize, prob: f64 },

    #[error("statistic {0} has no model-free null distribution")]
    NotDistributionFree(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Non-fatal conditions attached to results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// `1 − ⟨q,r⟩` (or `‖q − r‖`) is small enough that the rotation is
    /// poorly conditioned, though still orthogonal.
    IllConditioned { gap: f64 },
    /// Some expected cell count `n p_i` is below the usual rule of thumb.
    SmallCell { min_expected: f64 },
    /// The estimated-parameter components were not exactly orthogonal to
    /// `q` and `q̂`; the residuals carry through linearly.
    OrthogonalityResidual { q: f64, qhat: f64 },
}
