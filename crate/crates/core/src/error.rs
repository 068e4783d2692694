use thiserror::Error;

/// Errors raised by the library.
///
/// Infeasibility of an LP or of a matching is not an error; those are
/// reported through the respective result enums.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Should be unreachable when upstream steps are correct.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("did not terminate: {0}")]
    NonTerminated(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
