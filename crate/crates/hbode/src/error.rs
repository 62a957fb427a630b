//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    /// The friction schedule alpha = (3 L2)^(2/7) (delta_f / T)^(1/7) collapses
    /// to zero when L2 = 0 or delta_f = 0; the caller must supply alpha explicitly.
    #[error(
        "degenerate friction schedule (L2 = {l2}, delta_f = {delta_f}); supply --alpha explicitly"
    )]
    DegenerateSchedule { l2: f64, delta_f: f64 },

    #[error(
        "horizon too short: T = {t_final} <= 3/(2 alpha) = {threshold}; finite-T bound is vacuous"
    )]
    HorizonTooShort { t_final: f64, threshold: f64 },

    #[error("trajectory diverged (non-finite state) at step {step}")]
    Divergence { step: usize },

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("weight argument s = {s} outside [0, {t}]")]
    WeightOutOfRange { s: f64, t: f64 },

    #[error("need at least {needed} checkpoints in range, found {found}")]
    InsufficientCheckpoints { found: usize, needed: usize },

    #[error("weight samples integrate to {integral}, expected 1")]
    WeightNotNormalized { integral: f64 },

    #[error("{name} must be strictly positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },

    #[error("rate fit needs at least {needed} points, got {found}")]
    TooFewPoints { found: usize, needed: usize },

    #[error("invalid integration parameters: {0}")]
    InvalidParams(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("csv schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
