use thiserror::Error;

/// Errors produced by model construction, marginalization, and structure
/// recovery.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A file or serialized payload could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Parsed or constructed data violates a structural or numeric invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// An independence oracle was configured for a distribution source it
    /// cannot serve (e.g. a sample-based test against an exact source).
    #[error("oracle configuration error: {0}")]
    OracleConfig(String),

    /// Random model generation exhausted its retry budget without producing
    /// a model that passes the non-degeneracy check.
    #[error("no non-degenerate model found in {attempts} attempts")]
    GenerationBudget { attempts: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// An internal invariant was broken; this indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
