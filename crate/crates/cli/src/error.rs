use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}, column `{column}`: {message}")]
    Data {
        path: PathBuf,
        /// 1-based data row, header excluded.
        row: usize,
        column: String,
        message: String,
    },

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Numerical(lola::Error),
}

impl CliError {
    /// Stable process exit status.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Data { .. } | CliError::Format(_) => 4,
            CliError::Numerical(_) => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<lola::Error> for CliError {
    fn from(e: lola::Error) -> Self {
        use lola::Error as E;
        match e {
            E::InvalidScenario(_) | E::UnknownSelector(_) | E::EmptyDictionary | E::Domain(_) => {
                CliError::Config(e.to_string())
            }
            E::NonFinite(_) | E::DimensionMismatch(_) => CliError::Format(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
