use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("entropy Hessian is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("kinetic coefficient matrix is singular or ill-conditioned (residual {residual:e})")]
    SingularKinetics { residual: f64 },

    #[error("zero time interval: the kernel degenerates to a delta function")]
    ZeroTime,

    #[error("caustic: evaluation within {distance:e} of a kernel singularity")]
    Caustic { distance: f64 },

    #[error("times must be strictly increasing (violation at index {index})")]
    NonMonotoneTimes { index: usize },

    #[error("quadrature did not converge: estimate error {error:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence { error: f64, tolerance: f64 },

    #[error("stationary path could not be found: {0}")]
    MinimizerNonConvergence(String),

    #[error("value out of floating-point range: {0}")]
    Range(String),
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
