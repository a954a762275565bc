use std::fmt;

use quoter_core::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad or missing configuration (exit 2).
    Config(String),
    /// Explicit scheme unstable or blown up (exit 3).
    Stability(String),
    /// At least one verification check failed (exit 4).
    Verification(String),
    /// Anything else (exit 1).
    Other(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stability(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Config(m) => ("config error", m),
            CliError::Stability(m) => ("solver stability error", m),
            CliError::Verification(m) => ("verification failed", m),
            CliError::Other(m) => ("error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParams(_)
            | Error::InvalidConfig(_)
            | Error::InvalidTime { .. }
            | Error::GridTooSmall(_)
            | Error::TooFewLevels(_)
            | Error::DivergentHorizon { .. }
            | Error::NonpositiveLogArgument { .. }
            | Error::OutOfGrid { .. } => CliError::Config(msg),
            Error::CflViolation { .. } | Error::StepTooLarge { .. } | Error::NonfiniteField { .. } => {
                CliError::Stability(msg)
            }
            _ => CliError::Other(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
