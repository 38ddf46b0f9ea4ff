use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("matrix is not doubly stochastic: {reason}")]
    NotStochastic { reason: String },

    #[error("superoperator does not preserve trace (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("invalid density matrix: {reason}")]
    InvalidDensity { reason: String },

    #[error("invalid probability vector: {reason}")]
    InvalidProbability { reason: String },

    #[error("eigensolver failed on {dim}x{dim} matrix (frobenius norm {norm:.3e}): {reason}")]
    Eigensolver { dim: usize, norm: f64, reason: String },

    #[error("defective spectrum: eigenvector matrix condition number {condition:.3e} exceeds limit")]
    DefectiveSpectrum { condition: f64 },

    #[error("eigenvector {index} has zero norm")]
    ZeroNorm { index: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::NotUnitary { .. }
                | Error::NotStochastic { .. }
                | Error::NotTracePreserving { .. }
                | Error::InvalidDensity { .. }
                | Error::InvalidProbability { .. }
                | Error::Eigensolver { .. }
                | Error::DefectiveSpectrum { .. }
                | Error::ZeroNorm { .. }
        )
    }
}
