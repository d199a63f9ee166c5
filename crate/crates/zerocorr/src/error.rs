use std::io;

use zerocorr_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// A verification check failed.
    pub const CHECK_FAILED: u8 = 1;
    /// Bad flags, configuration, grid or capacity.
    pub const USAGE: u8 = 2;
    /// Malformed zeros file.
    pub const PARSE: u8 = 3;
    /// No zeros in the requested window.
    pub const EMPTY_WINDOW: u8 = 4;
    /// Reading or writing a file failed.
    pub const IO: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Config(String),
    #[error("prime cache: {0}")]
    Cache(String),
    #[error("{path}: {source}")]
    File { path: String, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(CoreError::Parse { .. }) => exit::PARSE,
            CliError::Core(CoreError::EmptyWindow(_)) => exit::EMPTY_WINDOW,
            CliError::Core(_) | CliError::Config(_) => exit::USAGE,
            CliError::Cache(_) | CliError::File { .. } | CliError::Io(_) => exit::IO,
        }
    }
}
