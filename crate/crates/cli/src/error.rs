use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Decode(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("replayed boxes differ from the manifest at frame {0}")]
    ReplayMismatch(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Decode(_) => 3,
            CliError::ReplayMismatch(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<sigmil::Error> for CliError {
    fn from(e: sigmil::Error) -> Self {
        match e.root() {
            sigmil::Error::Decode { .. } => CliError::Decode(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
