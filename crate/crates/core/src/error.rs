use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The kernel matrix could not be factorized, even after adding jitter.
    #[error("numerical failure: {message} (matrix size {size}, failing pivot {pivot:e}, jitter {jitter:e})")]
    NumericalFailure {
        message: String,
        size: usize,
        pivot: f64,
        jitter: f64,
    },

    #[error("resource limit exceeded: need {required} grid points but the cap is {cap}")]
    ResourceLimit { required: usize, cap: usize },

    #[error("at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
