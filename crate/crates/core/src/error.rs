use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("correlation rho = {rho} is outside the positive definite range ({lo}, 1) for K = {k}")]
    CorrelationOutOfRange { rho: f64, lo: f64, k: usize },

    #[error("invalid bit vector: {0}")]
    InvalidBits(String),

    #[error("invalid error vector: {0}")]
    InvalidErrorVector(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("matrix is singular or numerically singular")]
    Singular,

    #[error("K = {k} exceeds the limit of {max} for {what} (about {cost:.3e} candidate evaluations)")]
    TooLarge {
        what: &'static str,
        k: usize,
        max: usize,
        cost: f64,
    },

    #[error("error-vector set was built for a different channel (fingerprint {expected}, got {got})")]
    FingerprintMismatch { expected: String, got: String },

    #[error("non-positive energy epsᵀHeps = {0:e} for a nonzero error vector")]
    DegenerateEnergy(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
