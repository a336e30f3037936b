use robust_mdp::RmdpError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const INTERNAL: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const BUDGET_EXHAUSTED: u8 = 3;
    pub const NUMERICAL: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Solver(#[from] RmdpError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        CliError::Json { context: context.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Json { .. } => exit::USAGE,
            CliError::Solver(RmdpError::Numerical { .. }) => exit::NUMERICAL,
            CliError::Solver(_) => exit::USAGE,
            CliError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => exit::USAGE,
            CliError::Io { .. } | CliError::Csv(_) => exit::INTERNAL,
        }
    }
}
