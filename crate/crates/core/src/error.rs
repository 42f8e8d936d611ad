use thiserror::Error;

use crate::structeq::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("form degree {degree} out of range for basis dimension {dim}")]
    DegreeOutOfRange { degree: usize, dim: usize },

    #[error("bidegree ({p},{q}) does not match form degree {degree}")]
    BidegreeMismatch { p: usize, q: usize, degree: usize },

    #[error("bracket violates the Jacobi identity (residual {0:.3e})")]
    Jacobi(f64),

    #[error("not a complex structure: |J^2 + I| = {0:.3e}")]
    NotComplexStructure(f64),

    #[error("complex structure is not integrable (Nijenhuis residual {0:.3e})")]
    NotIntegrable(f64),

    #[error("complex structure is not abelian (residual {0:.3e})")]
    NotAbelian(f64),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("metric is not Hermitian for J (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("metric is not pluriclosed (residual {0:.3e})")]
    NotPluriclosed(f64),

    #[error("subspace is not a subalgebra (residual {0:.3e})")]
    NotSubalgebra(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("catalog entry `{entry}` failed verification: {detail}")]
    CatalogMismatch { entry: String, detail: String },

    #[error("structure equations: {0}")]
    StructureEquations(String),

    #[error("flow: {0}")]
    Flow(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
