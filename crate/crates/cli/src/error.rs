use sqg_core::SqgError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Param(String),

    #[error(transparent)]
    Core(#[from] SqgError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn param(msg: impl Into<String>) -> Self {
        CliError::Param(msg.into())
    }

    /// 1 for bad input, 2 for runs that failed or did not verify.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Param(_) | CliError::Io(_) | CliError::Csv(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Core(e) => match e {
                SqgError::BlowUp { .. } | SqgError::NonContraction { .. } | SqgError::QuadratureNotConverged { .. } => 2,
                _ => 1,
            },
        }
    }
}
