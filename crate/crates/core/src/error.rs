use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge list contains no edges")]
    EmptyInput,

    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The privacy calibration has no valid solution for the observed density.
    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(message: impl Into<String>) -> Result<T> {
    Err(Error::Domain(message.into()))
}
