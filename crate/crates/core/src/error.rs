use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the admissible range of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix that must be invertible is singular or indefinite.
    #[error("singular system: {0}")]
    Singular(String),

    /// An estimator was called with too few or degenerate samples.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Microstructure generation exhausted its rejection budget below the
    /// requested fiber volume fraction.
    #[error("jamming: {rejections} consecutive rejections at fraction {achieved:.4} (target {target:.4})")]
    Jamming {
        rejections: usize,
        achieved: f64,
        target: f64,
    },

    /// Geometry mismatch between a grid, mesh or window.
    #[error("geometry mismatch: {0}")]
    Geometry(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed serialized container or table.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
