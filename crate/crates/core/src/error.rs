use thiserror::Error;

pub type Result<T> = std::result::Result<T, QasError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("evolution diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),
}

impl QasError {
    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(QasError::Dimension { expected, found })
        }
    }
}
