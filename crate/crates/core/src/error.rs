use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error: {message}")]
pub struct ParseError {
    pub message: String,
}

impl ParseError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    /// A precondition on the shape of an input symbol failed.
    #[error("domain error: {0}")]
    Domain(String),

    /// The coefficient of `xi^-1` fed to the xi-integration depends on x or t.
    #[error("non-constant log coefficient: {0}")]
    NonConstantLog(String),

    /// An identity that must hold by construction was found violated.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// The requested computation cannot be represented at the configured truncation.
    #[error("insufficient truncation: {0}")]
    Truncation(String),

    #[error("compatibility check failed at level {level}: {detail}")]
    Compatibility { level: usize, detail: String },

    #[error("seed rejected: {0}")]
    Seed(String),

    #[error("gradient table is not closed: d/dt{k} of component {j} differs from d/dt{j} of component {k}")]
    NotClosed { j: u32, k: u32 },

    #[error("index out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
