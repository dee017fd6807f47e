use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate shadowing density: |rho| = {0} must be below 1")]
    Degenerate(f64),
    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate:e}, error {error:e}")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid parameter `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        field,
        reason: reason.into(),
    }
}
