use thiserror::Error;

/// Errors raised by the robust MDP toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RmdpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// KL support violation: mass on a coordinate where the nominal row is zero.
    #[error("infeasible: KL support violated at action {action}, next state {next_state}")]
    KlSupport { action: usize, next_state: usize },

    #[error("configuration error: {0}")]
    Config(String),

    /// A multiplier search failed to bracket or converge.
    #[error("numerical failure in {context}: {detail}")]
    Numerical { context: &'static str, detail: String },
}

impl RmdpError {
    pub(crate) fn numerical(context: &'static str, detail: impl Into<String>) -> Self {
        RmdpError::Numerical {
            context,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, RmdpError>;
