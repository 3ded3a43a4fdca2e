//! Experiment runner around the masked-consensus library: deterministic
//! file-based runs, mask/graph audits, attack jobs, and parameter sweeps.

use std::fmt;

pub mod config;
pub mod io;
pub mod runner;
pub mod svg;

/// Failures carry the process exit code: 1 for failed checks, 2 for
/// configuration/usage problems, 3 for numerical blowups.
#[derive(Debug)]
pub enum CliError {
    CheckFailed(String),
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::CheckFailed(msg) => write!(f, "check failed: {msg}"),
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
