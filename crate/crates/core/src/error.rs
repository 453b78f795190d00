use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite fitness in run {run} at iteration {iteration}")]
    NonFiniteFitness { run: String, iteration: usize },

    #[error("feature elimination removed every column")]
    AllColumnsRemoved,

    #[error("{stage}: missing input {}", path.display())]
    MissingInput { stage: &'static str, path: PathBuf },

    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },

    #[error("malformed file {}: {message}", path.display())]
    Malformed { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
