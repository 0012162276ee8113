use thiserror::Error;

/// Errors raised across the calculus.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("sampling produced a non-finite value at t = {t}")]
    Sampling { t: f64 },
    #[error("support must lie in [0, inf): got location {0}")]
    Support(f64),
    #[error("derivative order {order} exceeds supported depth {max}")]
    Capability { order: usize, max: usize },
    #[error("density does not vanish at its support start (|rho| = {value:e}); refusing to drop the boundary term")]
    BoundaryTerm { value: f64 },
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("operator failed: {0}")]
    Operator(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
