use thiserror::Error;

use crate::basis::BasisTag;

/// Errors raised by the model, solver, statistics and dynamics layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("spectral collapse: |lambda| = {lambda} >= 1/2 (collapse coupling for this m_x is {gamma_collapse})")]
    SpectralCollapse { lambda: f64, gamma_collapse: f64 },

    #[error("no collapse threshold in the m_x = 0 subspace")]
    Unbounded,

    #[error("operator couples parity sectors and must be requested in the full basis")]
    SectorMismatch,

    #[error("basis mismatch: spectrum in {spectrum:?}, operator in {operator:?}")]
    BasisMismatch {
        spectrum: BasisTag,
        operator: BasisTag,
    },

    #[error("eigenvectors were not retained for this spectrum")]
    MissingVectors,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("too few levels: need at least {needed}, got {got}")]
    TooFewLevels { needed: usize, got: usize },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("zero spacing on both sides of level {index}")]
    ZeroSpacing { index: usize },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("state outside the Bloch disk: Q^2 + P^2 = {rho2}")]
    DomainViolation { rho2: f64 },

    #[error("gradient singular at the Bloch disk boundary: Q^2 + P^2 = {rho2}")]
    BoundarySingularity { rho2: f64 },

    #[error("no real root: point is not on the energy shell eps = {energy}")]
    OutsideShell { energy: f64 },

    #[error("no sampled point lies on the energy shell eps = {energy}")]
    EmptyShell { energy: f64 },

    #[error("integration step failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("trajectory reached the Bloch disk boundary at t = {t}")]
    DomainExit { t: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
