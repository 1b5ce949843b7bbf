use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] valab_core::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

/// What goes to stderr, one JSON object per failure.
#[derive(Serialize)]
pub struct Diagnostic<'a> {
    pub error: &'a str,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Output(_) => 1,
            _ => 2,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(_) => "validation",
            CliError::Output(_) => "output",
        }
    }

    pub fn diagnostic(&self) -> String {
        let d = Diagnostic { error: self.class(), exit_code: self.exit_code(), message: self.to_string() };
        serde_json::to_string(&d).unwrap_or_else(|_| self.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
