use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-domain input (λ = 0, zero symbol, non-finite data...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The operation exists but the operator is outside the regime it needs.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Requested coefficients are not authoritative at the stored truncation.
    #[error("truncation: {0}")]
    Truncation(String),

    /// A configured computation budget was exhausted.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// Near-equal diagonal entries in a triangular eigenproblem.
    #[error("degenerate spectrum: {0}")]
    Degenerate(String),
}

impl Error {
    /// Stable machine-readable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Precondition(_) => "precondition",
            Error::Truncation(_) => "truncation",
            Error::Budget(_) => "budget",
            Error::Degenerate(_) => "degenerate",
        }
    }
}
