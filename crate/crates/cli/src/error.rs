use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("cannot read `{path}`: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write `{path}`: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid JSON in `{path}`: {message}")]
    Json { path: PathBuf, message: String },

    #[error("pivot limit of {0} reached")]
    PivotLimit(u64),

    #[error(transparent)]
    Core(#[from] thetacert::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use thetacert::Error as E;
        match self {
            CliError::PivotLimit(_) => EXIT_BUDGET,
            CliError::Core(E::BudgetExceeded { .. } | E::CountOverflow(_)) => EXIT_BUDGET,
            CliError::Core(E::Solver(_)) => EXIT_VERIFICATION,
            _ => EXIT_CONFIG,
        }
    }
}
