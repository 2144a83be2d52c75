use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] iars_core::Error),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Input(String),
    /// a check ran and reported a negative result; the message is the report
    #[error("{0}")]
    Rejected(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
