use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ncmart::Error),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed results file {}: {message}", path.display())]
    Results { path: PathBuf, message: String },
    #[error("unknown report format {0:?} (expected csv, json or plotdata)")]
    UnknownFormat(String),
    #[error("{0}")]
    Input(String),
}

impl LabError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
        let path = path.into();
        move |source| LabError::Io { path, source }
    }

    pub(crate) fn results(path: impl Into<PathBuf>, message: impl ToString) -> LabError {
        LabError::Results {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code: configuration and every other failure map to 1;
    /// verification mismatches are reported separately with 2.
    pub fn exit_code(&self) -> i32 {
        1
    }
}
