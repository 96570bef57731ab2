//! Error type shared across the crate.
//!
//! Variants split into two families the CLI maps onto exit codes: input
//! problems (parse errors, invalid algebra data, inadmissible metrics) and
//! numerical failures discovered while computing.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bracket index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid structure constants: {0}")]
    InvalidAlgebra(String),

    #[error("nilpotency class {class} exceeds the supported bound 4")]
    UnsupportedClass { class: usize },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("drift one-form too large: |X|_a = {norm} must stay below 1")]
    Inadmissible { norm: f64 },

    #[error("tangent vector must be nonzero")]
    ZeroTangent,

    #[error("flag plane is degenerate: span(y, u) has vanishing area")]
    DegenerateFlag,

    #[error("drift field is not Killing (residual {residual:.3e}); pass force to override")]
    NotKilling { residual: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("linear solve failed: matrix numerically singular")]
    SingularMatrix,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("model validation failed: {0}")]
    Model(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::IndexOutOfRange { .. }
                | Error::InvalidAlgebra(_)
                | Error::UnsupportedClass { .. }
                | Error::NotSymmetric
                | Error::NotPositiveDefinite { .. }
                | Error::Inadmissible { .. }
                | Error::ZeroTangent
                | Error::NotKilling { .. }
                | Error::TooFewSamples { .. }
                | Error::Parse { .. }
                | Error::Model(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
