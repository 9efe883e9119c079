use thiserror::Error;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// The loss quantile at probability zero is the essential supremum, which is infinite.
    #[error("quantile at p = 0 is unbounded: the loss has no finite essential supremum")]
    Unbounded,

    /// A model or distortion parameter is invalid.
    #[error("invalid {what}: {reason}")]
    InvalidParameter { what: &'static str, reason: String },

    /// An empirical quantile table failed validation.
    #[error("empirical table rejected ({reason}) at indices {indices:?}")]
    InvalidTable { reason: String, indices: Vec<usize> },

    /// A quantile grid violates the admissibility conditions.
    #[error("inadmissible quantile grid at cell {index}: {reason}")]
    InadmissibleGrid { index: usize, reason: &'static str },

    /// The distorted premium of the loss (or a tail of it) does not converge.
    #[error("premium not finite: {0}")]
    PremiumNotFinite(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain<T: crate::Scalar>(
        what: &'static str,
        value: T,
        domain: &'static str,
    ) -> Self {
        Error::Domain {
            what,
            value: value.f64(),
            domain,
        }
    }

    pub(crate) fn param(what: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            what,
            reason: reason.into(),
        }
    }
}
