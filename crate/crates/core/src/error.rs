use thiserror::Error;

/// Errors raised by the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid input shape, range or combination of options.
    #[error("configuration error: {0}")]
    Config(String),

    /// The tridiagonal eigen-solve or the Newton polish failed to produce roots.
    #[error("root finding did not converge for degree {degree}")]
    RootsDidNotConverge { degree: usize },

    /// Requested degree is outside the supported range.
    #[error("unsupported degree {degree} (supported: 1..={max})")]
    UnsupportedDegree { degree: usize, max: usize },

    /// Least-squares matrix is numerically rank deficient.
    #[error("rank-deficient system: condition estimate {condition:.3e} exceeds {limit:.1e}")]
    RankDeficient { condition: f64, limit: f64 },

    /// A NaN or infinity showed up during training.
    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    /// Some other intermediate quantity became NaN or infinite.
    #[error("numerical failure: {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors that stem from floating-point breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Config(_) | Error::UnsupportedDegree { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
