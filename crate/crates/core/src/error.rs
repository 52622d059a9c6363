use alloc::string::String;

/// Errors raised by grid construction, assembly, solves and experiments.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {what} (after {iterations} iterations)")]
    NumericalFailure { what: String, iterations: usize },

    /// `F'(κ₀)` vanishes, so no critical coupling is defined.
    #[error("critical coupling undefined: F'(kappa0) = {f1:e}")]
    UndefinedCriticalCoupling { f1: f64 },

    /// The tracked eigenvalue is (numerically) multiple at an optimizer iterate.
    #[error("eigenvalue {index} is degenerate at iteration {iteration} (gap {gap:e})")]
    Degeneracy { index: usize, iteration: usize, gap: f64 },

    #[error("line search failed at iteration {iteration}")]
    LineSearchFailure { iteration: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::invalid(alloc::format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
