use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("integration diverged at t = {t}: update norm ratio {growth}")]
    Diverged { t: f64, growth: f64 },
    #[error("quadrature budget exceeded: estimate {estimate} with error bound {error_bound}")]
    BudgetExceeded { estimate: f64, error_bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
