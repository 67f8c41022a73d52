use serde_json::json;
use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    /// A verdict or verification came out negative; the report was still written.
    pub const FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const BUDGET: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] eigenop_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(eigenop_core::Error::Budget(_) | eigenop_core::Error::Truncation(_)) => exit::BUDGET,
            _ => exit::USAGE,
        }
    }

    /// `{"error": {"code": ..., "message": ...}}` on one line.
    pub fn envelope(&self) -> String {
        json!({ "error": { "code": self.code(), "message": self.to_string() } }).to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
