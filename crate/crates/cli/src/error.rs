use oda_agent::ConfigError;
use oda_core::analysis::AnalysisError;
use oda_sim::SimError;
use oda_transport::{StoreError, TransportError};
use thiserror::Error;

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Exit 1: bad flags, unreadable or invalid config, unwritable output.
    #[error("{0}")]
    Config(String),
    /// Exit 2: a series, bundle or store the command needs is absent or empty.
    #[error("{0}")]
    MissingData(String),
    /// Exit 3: the data is there but violates an analysis precondition.
    #[error("{0}")]
    Precondition(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::MissingData(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }

    pub fn config(msg: impl std::fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn missing(msg: impl std::fmt::Display) -> Self {
        CliError::MissingData(msg.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::EmptyTrace | AnalysisError::MissingRail(_) => CliError::MissingData(e.to_string()),
            AnalysisError::InvalidInput(_) | AnalysisError::WrongUnit(_) => CliError::Config(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Bundle(_) | SimError::Io(_) => CliError::MissingData(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::BadRange { .. } | StoreError::InvalidKey(_) => CliError::Config(e.to_string()),
            _ => CliError::MissingData(e.to_string()),
        }
    }
}

impl From<TransportError> for CliError {
    fn from(e: TransportError) -> Self {
        CliError::Config(e.to_string())
    }
}
