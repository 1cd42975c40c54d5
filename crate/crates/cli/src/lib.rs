//! Experiment harness for the high-contrast Helmholtz solver: config
//! parsing, CSV emission, convergence-order arithmetic, and the experiment
//! runners the `hmm` binary dispatches to.

use std::fmt;

pub mod config;
pub mod csvout;
pub mod eoc;
pub mod experiments;

/// Anything a runner can fail with.
#[derive(Debug)]
pub enum RunError {
    Core(helmholtz_hmm::Error),
    Config(config::ConfigError),
    Io(std::io::Error),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Core(e) => e.kind(),
            RunError::Config(_) => "ConfigError",
            RunError::Io(_) => "IoError",
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<helmholtz_hmm::Error> for RunError {
    fn from(e: helmholtz_hmm::Error) -> Self {
        RunError::Core(e)
    }
}

impl From<config::ConfigError> for RunError {
    fn from(e: config::ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}
