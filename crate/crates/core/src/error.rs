use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("empty feasible region: {0}")]
    EmptyFeasibleRegion(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {estimate:e})")]
    Quadrature { subdivisions: usize, estimate: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("value is not representable exactly: {0}")]
    Inexact(String),

    #[error("convolution needs more than {cap} atoms")]
    AtomCapExceeded { cap: usize },

    #[error("ratio undefined: {0}")]
    RatioUndefined(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}
