use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// `L_N[x_i]` leaves the span of the chosen observables.
    #[error("locality violation: generator maps observable #{index} outside span(chi), residual {residual:.3e}")]
    LocalityViolation { index: usize, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
