use thiserror::Error;

use crate::substitution::Identity;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point lies outside the closed domain of a function or measure.
    #[error("x = {x} lies outside the domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    /// A constructor rejected its input (ordering, monotonicity, endpoint data).
    #[error("invalid function: {0}")]
    Invalid(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The inner function's range does not fit the outer function's domain.
    #[error("composition error: {0}")]
    Composition(String),

    /// The generalized inverse of a constant function would live on a single point.
    #[error("function is constant ({level}), its range [{level}, {level}] is degenerate")]
    DegenerateRange { level: f64 },

    /// An integrand declared monotone is not.
    #[error("integrand is not {direction}: {detail}")]
    NotMonotone {
        direction: &'static str,
        detail: String,
    },

    /// The hypothesis of an identity fails for the given inputs.
    #[error("{identity} precondition violated: {reason} = {location}")]
    Precondition {
        identity: Identity,
        reason: String,
        location: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for precondition violations; the CLI maps these to a distinct exit code.
    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::Precondition { .. })
    }
}
