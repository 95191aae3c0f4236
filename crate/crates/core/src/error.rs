use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the evaluated function or operator.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Rayleigh order is grazing (`|Λ*j + α| = k`) where the caller asked for a
    /// representation that divides by `β(j)`.
    #[error("Wood anomaly at alpha = {alpha}, order j = {order}; use the sinc representation")]
    Anomaly { alpha: f64, order: i64 },

    /// Source and target are too close vertically for the spectral series.
    #[error("vertical separation {separation:e} below the minimum {minimum:e}")]
    Separation { separation: f64, minimum: f64 },

    /// A Herglotz density reaches into the grazing cutoff.
    #[error("Herglotz density support reaches grazing incidence: {0}")]
    Grazing(String),

    /// Malformed arguments (empty grids, mismatched lengths, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Inconsistent solver or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Mesh generation or validation failed.
    #[error("mesh error: {0}")]
    Mesh(String),

    /// The sparse factorization broke down.
    #[error("singular quasiperiodic system at alpha = {alpha}, k = {k}: {reason}")]
    Singular { alpha: f64, k: f64, reason: String },

    /// The computed solution does not meet the residual tolerance.
    #[error("relative residual {residual:e} exceeds tolerance {tolerance:e} at alpha = {alpha}")]
    SolverQuality { alpha: f64, residual: f64, tolerance: f64 },

    /// A derived quantity does not exist for the given input.
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
