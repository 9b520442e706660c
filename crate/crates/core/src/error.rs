use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Domain and usage problems are kept apart from convergence failures so a
/// front end can map them onto distinct exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rho = {rho} is outside the admissible range: {bound}")]
    RhoOutOfRange { rho: f64, bound: &'static str },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("power iteration did not converge after {iterations} iterations (last change {last_change:e}, last estimate {lambda})")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        lambda: f64,
        vector: Vec<f64>,
    },

    #[error("fit window [{lo}, {hi}] is unusable: {reason}")]
    FitWindow {
        lo: usize,
        hi: usize,
        reason: String,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::NotConverged { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
