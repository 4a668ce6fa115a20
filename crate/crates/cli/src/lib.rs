//! Library half of the `erlq` command: argument definitions, the commands
//! themselves and their output records.

pub mod args;
pub mod commands;
pub mod record;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] erlang_queue::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for usage errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

/// Maps parameter validation failures to usage errors; everything else the
/// core reports is numerical.
pub(crate) fn classify(err: erlang_queue::Error) -> CliError {
    match err {
        erlang_queue::Error::InvalidParams(msg) => CliError::Usage(msg),
        other => CliError::Numerical(other),
    }
}
