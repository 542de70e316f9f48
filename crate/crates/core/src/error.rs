use thiserror::Error;

/// Every failure the library reports. Variants map onto the classes the CLI
/// turns into exit codes: [`Error::is_validation`] for bad inputs, everything
/// else for numerical failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("scale out of range: {0}")]
    OutOfRange(String),
    #[error("band limit exceeded: {0}")]
    BandLimit(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate factorization: {0}")]
    DegenerateFactorization(String),
    #[error("integration too costly: {message} (largest affordable K is about {suggested_max_k:.3e})")]
    Cost { message: String, suggested_max_k: f64 },
    #[error("periodic wrap-around contamination: {0}")]
    WrapAround(String),
    #[error("aliasing: {0}")]
    Aliasing(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::Domain(_)
                | Error::OutOfRange(_)
                | Error::BandLimit(_)
                | Error::Precondition(_)
                | Error::Aliasing(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
