use harsanyi::oracle::{EvalError, OracleError};
use thiserror::Error;

/// CLI failure, classified by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// An analysis ran and its check failed (exit 1).
    #[error("{0}")]
    Analysis(String),

    /// File system, table file, or oracle transport failure (exit 2).
    #[error("{0}")]
    Io(String),

    /// Bad flags, oracle descriptor, or argument ranges (exit 3).
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analysis(_) => 1,
            CliError::Io(_) => 2,
            CliError::Config(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl From<harsanyi::Error> for CliError {
    fn from(e: harsanyi::Error) -> Self {
        use harsanyi::Error as E;
        match e {
            E::Io { .. } | E::Format(_) => CliError::Io(e.to_string()),
            E::UndefinedSimilarity => CliError::Analysis(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Source(_) => CliError::Config(e.to_string()),
            _ => CliError::Io(format!("oracle: {e}")),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::InvalidOptions(_) => CliError::Config(e.to_string()),
            EvalError::Failed { .. } => CliError::Io(e.to_string()),
        }
    }
}
