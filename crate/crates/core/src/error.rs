use thiserror::Error;

/// Errors produced by the mesh, solver and transform layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("meshing failed: {0}")]
    Meshing(String),

    #[error("mesh validation failed: {0}")]
    MeshValidation(String),

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error(
        "eigensolver did not converge after {iterations} iterations \
         (residual {residual:.3e}, last estimate {estimate})"
    )]
    NotConverged {
        iterations: usize,
        residual: f64,
        estimate: f64,
        last_iterate: Vec<f64>,
    },

    #[error("value outside tabulated range: {0}")]
    Range(String),

    #[error("no sign change while bracketing root: {0}")]
    NoBracket(String),

    #[error("query outside table coverage: {0}")]
    Coverage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
