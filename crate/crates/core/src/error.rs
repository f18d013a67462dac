use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A function produced a non-finite value.
    #[error("non-finite value {value} at t = {t}")]
    Evaluation { t: f64, value: f64 },

    /// A quadrature could not reach the requested tolerance.
    #[error("quadrature tolerance {requested:e} unreachable, achieved error estimate {achieved:e}")]
    Tolerance { requested: f64, achieved: f64 },

    /// The kernel coefficient dipped below its declared lower bound.
    #[error("coefficient {value} below lower bound {bound} at t = {t}")]
    Precondition { t: f64, value: f64, bound: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    /// Decay rate of the attractivity condition is not positive.
    #[error("attractivity condition fails: rate {lambda} is not positive")]
    ConditionViolation { lambda: f64 },

    #[error("unsupported problem: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg()))
    }
}
