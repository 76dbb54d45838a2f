use thiserror::Error;

/// Errors surfaced by the laboratory. Every fallible operation is explicit
/// about *why* it refuses to run: bad input, a violated precondition, or a
/// computation that would blow past a configured budget. Budgets are errors,
/// never silent truncation — an approximate answer with a wrong term count is
/// worse than no answer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: String,
        needed: u128,
        budget: u128,
    },

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("serialization failed: {0}")]
    Serialization(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag for CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Precondition(_) => "precondition",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::QuadratureFailure(_) => "quadrature-failure",
            Error::Serialization(_) => "serialization",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
