use thiserror::Error;

/// Errors raised by the channel model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Source and observation points coincide; the Green's function is singular there.
    #[error("singular Green's function: observation point coincides with source (separation {separation:e} m)")]
    Singularity { separation: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("samples do not lie on the aperture quadrature grid: {0}")]
    GridMismatch(String),

    #[error("zero diagonal coupling for mode index {0}; cannot equalize")]
    ZeroDiagonal(usize),

    #[error("degenerate kernel: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
