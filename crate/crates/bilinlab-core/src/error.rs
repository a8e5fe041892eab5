use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside the validity box: {0}")]
    Domain(String),

    #[error("degenerate mixed Hessian: smallest singular value {sigma_min:.3e} below floor {floor}")]
    Degenerate { sigma_min: f64, floor: f64 },

    #[error("resolution rule violated on axis `{axis}`: step {step:.3e} > allowed {max_step:.3e}")]
    Resolution {
        axis: String,
        step: f64,
        max_step: f64,
    },

    #[error("scales out of order: mu = {mu} exceeds lambda = {lambda}")]
    ArgumentOrder { lambda: f64, mu: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("caustic onset at s = {s}: flow Jacobian {jacobian:.3e}")]
    Caustic { s: f64, jacobian: f64 },

    #[error("accuracy check failed: residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    Accuracy { residual: f64, tol: f64 },

    #[error("band exceeds Nyquist: {0}")]
    Aliasing(String),

    #[error("problem too large: {0}")]
    Scale(String),

    #[error("discretization check failed: {0}")]
    Discretization(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("serialization: {0}")]
    Serde(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
