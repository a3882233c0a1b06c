//! Crate-wide error type and result alias.

use thiserror::Error;

/// Errors produced by validation, solvers, and I/O across the crate.
#[derive(Error, Debug)]
pub enum Error {
    /// A matrix or vector had an unexpected shape.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix failed the Hermiticity check `|a[j][k] - conj(a[k][j])| <= tol`.
    #[error("matrix is not Hermitian within tolerance {tol:e}: max deviation {deviation:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    /// A candidate density matrix failed trace or positivity validation.
    #[error("not a density matrix: {0}")]
    NotDensity(String),

    /// A scalar or vector argument was outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The target expected-value vector lies outside the convex support.
    /// Carries the certifying direction and the size of the violation
    /// `lambda . alpha - h(lambda)`.
    #[error("target is infeasible: support violation {violation:e} in direction {direction:?}")]
    Infeasible { direction: Vec<f64>, violation: f64 },

    /// The dual Newton iteration gave out before meeting its tolerance.
    #[error("solver failed to converge: {0}")]
    SolverFailure(String),

    /// The face-compression recursion could not certify an exposed face.
    #[error("face certification failed: {0}")]
    FaceCertification(String),

    /// A query point was not on (or inside) the body it must belong to.
    #[error("point out of range: {0}")]
    OutOfRange(String),

    /// Malformed input document (JSON shape, missing field, bad number).
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
