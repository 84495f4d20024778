use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("parameter `{name}` out of range: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("path generation failed: {0}")]
    Generation(String),
    #[error("specification rejected: {0}")]
    SpecValidation(String),
    #[error("grid alignment: {0}")]
    Alignment(String),
    #[error("order {order} exceeds the expansion's maximal order {max_order}")]
    Order { order: usize, max_order: usize },
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("coverage: {0}")]
    Coverage(String),
    #[error("configuration: {0}")]
    Configuration(String),
    #[error(
        "Picard iteration did not converge after {iterations} sweeps (last residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("rate fit: {0}")]
    Fit(String),
    #[error("{failed} of {total} replicas failed (first failure: {first})")]
    StudyFailed {
        failed: usize,
        total: usize,
        first: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
