use std::io;
use std::path::PathBuf;

/// Errors from file handling, configuration and the statistical core.
#[derive(Debug, thiserror::Error)]
pub enum GofError {
    #[error(transparent)]
    Core(#[from] gpgof_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {message}", path.display())]
    Data { path: PathBuf, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("output: {0}")]
    Output(String),
}

impl GofError {
    /// Whether the error stems from user input (bad data, config or
    /// arguments) rather than from a failure of the program itself.
    pub fn is_user_error(&self) -> bool {
        match self {
            GofError::Core(e) => !matches!(e, gpgof_core::Error::PmfCap { .. }),
            GofError::Io { .. } | GofError::Data { .. } | GofError::Config(_) => true,
            GofError::Output(_) => false,
        }
    }
}

pub type Result<T, E = GofError> = std::result::Result<T, E>;
