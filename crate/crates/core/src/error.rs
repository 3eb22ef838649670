use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma function pole at {0}")]
    Pole(String),
    #[error("series did not converge after {terms} terms (last term magnitude {last:e})")]
    SeriesNotConverged { terms: usize, last: f64 },
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    QuadratureNotConverged { estimate: f64, error: f64 },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("negative density {value:e} at theta = {theta}")]
    NegativeDensity { theta: f64, value: f64 },
    #[error("fit is degenerate: {0}")]
    FitDegenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::InvalidParams(_) | Error::Unsupported(_))
    }
}
