use rsg_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("solver diverged at cumulative iteration {cum_iter}")]
    Diverged { cum_iter: u64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) | CliError::Io(_) => 2,
            CliError::Diverged { .. } => 3,
            CliError::Invariant(_) => 4,
        }
    }

    /// Errors raised while assembling a problem from a config.
    pub fn from_build(e: CoreError) -> Self {
        match e {
            CoreError::Parse { .. } | CoreError::Io(_) => CliError::Data(e.to_string()),
            CoreError::Divergence { cum_iter, .. } => CliError::Diverged { cum_iter },
            CoreError::Inconsistent(m) => CliError::Invariant(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
