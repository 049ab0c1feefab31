use scottlab_core::Error as CoreError;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed report: {0}")]
    Report(#[from] serde_json::Error),
}

/// Process exit codes.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const FAIL: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const BUDGET: u8 = 3;
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(CoreError::BudgetExceeded { .. }) => exit::BUDGET,
            CliError::Core(
                CoreError::Realizability(_)
                | CoreError::DisagreementImpossible { .. }
                | CoreError::AvoidanceImpossible { .. }
                | CoreError::EmptyCondition,
            ) => exit::FAIL,
            _ => exit::CONFIG,
        }
    }
}

/// Core errors that stem from the scenario rather than the run become
/// config errors anchored at `line`.
pub fn at_line(line: Option<usize>) -> impl Fn(CoreError) -> CliError {
    move |e| match e {
        CoreError::BudgetExceeded { .. }
        | CoreError::Realizability(_)
        | CoreError::DisagreementImpossible { .. }
        | CoreError::AvoidanceImpossible { .. }
        | CoreError::EmptyCondition => CliError::Core(e),
        other => CliError::Config(ConfigError::at(line, other.to_string())),
    }
}
