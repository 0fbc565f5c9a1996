use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Requested object exceeds the configured size limit or shapes disagree.
    #[error("size error: {0}")]
    Size(String),
    /// A documented precondition on an input was violated.
    #[error("contract violation: {0}")]
    Contract(String),
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The eigensolver did not converge.
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
    /// Shadow sample whose conditional weight vanishes; the caller resamples.
    #[error("degenerate shadow sample (conditional weight {0:e})")]
    DegenerateSample(f64),
}
