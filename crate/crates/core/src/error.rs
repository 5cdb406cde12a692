use thiserror::Error;

use crate::model::DecodingOrder;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The parameters make a closed form undefined (e.g. a zero denominator).
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// `pa_bounds` needs |h_1|^2 > |h_2|^2.
    #[error("channel ordering violated: near gain {near} must exceed far gain {far}")]
    OrderingViolation { near: f64, far: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound}")]
    Convergence { estimate: f64, error_bound: f64 },

    #[error("analytic unavailable for {0}")]
    AnalyticUnavailable(DecodingOrder),

    /// Every candidate power allocation gives certain outage.
    #[error("no feasible power allocation: SOP is 1 over the whole grid")]
    NoFeasibleAlpha,

    /// Rejected configuration (scenario file, sweep spec).
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
