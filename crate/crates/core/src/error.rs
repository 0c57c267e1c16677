use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("no bounded motion: {0}")]
    NoBoundedMotion(String),
    #[error("integrand singularity: {0}")]
    Singularity(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("integration step failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("trajectory too short: {0}")]
    InsufficientSpan(String),
    #[error("branch tracking failed: {0}")]
    BranchTracking(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
