use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config keys or config values.
    #[error("config error: {0}")]
    Config(String),

    /// Missing, unreadable or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),

    /// A checkpoint document that cannot be parsed.
    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error("checkpoint version {found} is not supported (expected {expected})")]
    Version { found: i64, expected: i64 },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A broken internal invariant.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) | CliError::Format(_) | CliError::Version { .. } | CliError::Io { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<stockbot_core::Error> for CliError {
    fn from(e: stockbot_core::Error) -> Self {
        use stockbot_core::Error as E;
        match e {
            E::Argument(_) | E::Format(_) => CliError::Data(e.to_string()),
            E::Shape { .. } | E::State(_) => CliError::Internal(e.to_string()),
        }
    }
}
