//! Experiment driver around `bellsim_core`: JSON configuration, combination
//! orchestration, and report/CSV emission for the command-line binary.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;

/// Driver-level failure, split by who has to fix it: `Config` means the
/// invocation or configuration file is wrong (exit code 2), `Runtime` means
/// the work itself failed (exit code 3).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<bellsim_core::SimError> for CliError {
    fn from(e: bellsim_core::SimError) -> Self {
        CliError::Runtime(e.to_string())
    }
}
