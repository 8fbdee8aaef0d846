use thiserror::Error;

/// Errors surfaced by the laboratory. Numeric routines fail loudly rather
/// than silently truncating or clamping.
#[derive(Error, Debug)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("truncation error: requested N'={requested} exceeds field N={actual}")]
    Truncation { requested: u32, actual: u32 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solution diverged: {0}")]
    Divergence(String),

    #[error("step size underflow (dt={dt:.3e} at t={t:.6}); system too stiff for the configured law")]
    Stiffness { dt: f64, t: f64 },

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
