use thiserror::Error;

use crate::potential1d::OrderCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: ordering, sign, or length violations.
    #[error("invalid input at index {index:?}: {reason}")]
    Validation { index: Option<usize>, reason: String },

    #[error("value {value} outside [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    /// A measure carries mass outside the admissible open set.
    #[error("measure leaks mass {leaked_mass} outside the open set")]
    Support { leaked_mass: f64 },

    #[error("density {max_density} exceeds the upper bound 1")]
    Admissibility { max_density: f64 },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("kernel is singular at the origin in dimension {dim}")]
    Singularity { dim: u32 },

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    /// A constructed object failed its own certificate. Indicates a bug or
    /// a genuine counterexample; the certificate carries the evidence.
    #[error("verification failed: {reason}")]
    Verification {
        reason: String,
        certificate: Option<Box<OrderCertificate>>,
    },
}

impl Error {
    pub(crate) fn validation(index: impl Into<Option<usize>>, reason: impl Into<String>) -> Self {
        Error::Validation {
            index: index.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn verification(reason: impl Into<String>) -> Self {
        Error::Verification {
            reason: reason.into(),
            certificate: None,
        }
    }
}
