//! Error types shared across the crate.

use num_complex::Complex64;
use thiserror::Error;

/// What a single scenario-validation failure is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NonPositiveFrequency,
    NonNormalizedInitialState,
    NonHermitianInitialState,
    BadPiecewiseTable,
    NonPositiveParameter,
}

/// One validation failure, pointing at the offending field.
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} at `{}`: {}", self.kind, self.field, self.message)
    }
}

fn list_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario validation failed: {}", list_violations(.0))]
    Validation(Vec<Violation>),

    #[error(
        "series for element ({n},{m}) did not converge within {terms} terms; \
         last partial sums {last:?}"
    )]
    SeriesNonConvergence {
        n: usize,
        m: usize,
        terms: usize,
        last: [Complex64; 3],
    },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("Fock space dimension {dim} exceeds the configured cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("eigendecomposition of a {dim}x{dim} matrix failed to converge")]
    EigendecompositionFailure { dim: usize },

    #[error("invalid probability vector: {reason}")]
    ProbabilityVectorInvalid { reason: String },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
}

impl Error {
    /// Process exit code convention used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::ProbabilityVectorInvalid { .. }
            | Error::UnsupportedRegime(_) => 2,
            Error::SeriesNonConvergence { .. }
            | Error::QuadratureNonConvergence { .. }
            | Error::EigendecompositionFailure { .. } => 3,
            Error::DimensionOverflow { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
