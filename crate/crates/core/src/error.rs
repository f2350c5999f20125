use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Validation problems are *not* errors: they are reported through
/// [`ValidationReport`](crate::circuit::ValidationReport).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input had the wrong length or arity.
    #[error("input shape error: {0}")]
    InputShape(String),

    /// A request would exceed a configured size limit.
    #[error("resource limit: {what} is {actual}, limit is {limit}")]
    ResourceLimit {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    /// An argument was outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The compiler was handed a circuit it does not know how to lower.
    #[error("unsupported circuit shape: {0}")]
    UnsupportedShape(String),

    /// The strong simulator precondition does not hold.
    #[error("circuit outside the strongly simulable class: {0}")]
    UnsupportedClass(String),

    /// Every postselected branch has zero probability.
    #[error("postselection has zero success probability")]
    DegeneratePostselection,

    /// Two artifacts that must agree do not (trace vs circuit, IR corruption).
    #[error("consistency error: {0}")]
    Consistency(String),

    /// Malformed text or JSON input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
