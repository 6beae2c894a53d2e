use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Error)]
pub enum QexError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error(
        "dense materialization of dimension {dim} exceeds the cap {cap}; \
         use a matrix-free method (power or lanczos) instead"
    )]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("member {index} is not unitary: residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotUnitary {
        index: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("invalid permutation for generator {index}: {reason}")]
    InvalidPermutation { index: usize, reason: String },

    #[error("generators do not act transitively: orbit of 0 has {reached} of {order} elements")]
    NotTransitive { reached: usize, order: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QexError>;

/// Checks `lo < value < hi` (open interval).
pub(crate) fn check_open(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    domain: &'static str,
) -> Result<()> {
    if value.is_finite() && value > lo && value < hi {
        Ok(())
    } else {
        Err(QexError::Domain {
            name,
            value,
            domain,
        })
    }
}
