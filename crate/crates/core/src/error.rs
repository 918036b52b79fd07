use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The integrand has not decayed at the truncation radius.
    #[error("integrand not decayed at cutoff: |f(R)| = {tail:.3e} vs max {peak:.3e}")]
    TailNotDecayed { tail: f64, peak: f64 },

    #[error("empty feasible interval for s: ({lower}, {upper})")]
    EmptyFeasibleInterval { lower: f64, upper: f64 },

    #[error("ill-conditioned Gram matrix (condition number {0:.3e}); reduce k")]
    IllConditioned(f64),

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
