use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("matrix is not positive definite: non-positive pivot at index {pivot}")]
    NotPositiveDefinite { pivot: usize },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("columns {first} and {second} are collinear within the active set")]
    Collinear { first: usize, second: usize },

    #[error("coordinate descent did not converge after {sweeps} sweeps (last change {last_change:e})")]
    NotConverged { sweeps: usize, last_change: f64 },

    #[error("coefficient vector has zero l1 norm")]
    ZeroNorm,

    #[error("column {index} is identically zero")]
    ZeroColumn { index: usize },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn dims(op: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            op,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
