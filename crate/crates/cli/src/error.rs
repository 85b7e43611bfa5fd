use std::path::Path;

use ideofactor::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 0 ok, 2 input, 3 numeric, 4 insufficient overlap for a metric.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core { source, .. } => match source {
                Error::NumericAbort { .. } | Error::NegativeComponent(_) => 3,
                Error::InsufficientOverlap { .. } | Error::ZeroVariance { .. } => 4,
                _ => 2,
            },
        }
    }
}

impl From<Error> for CliError {
    fn from(source: Error) -> Self {
        CliError::Core {
            context: "ideofactor".into(),
            source,
        }
    }
}

pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError>;
    fn in_file(self, path: &Path) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, Error> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: what.into(),
            source,
        })
    }

    fn in_file(self, path: &Path) -> Result<T, CliError> {
        self.context(path.display().to_string())
    }
}
