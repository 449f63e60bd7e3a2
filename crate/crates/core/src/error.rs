use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A size or dimension precondition was violated.
    #[error("size error: {0}")]
    Size(String),
    /// A circuit parameter could not be bound to a value.
    #[error("binding error: {0}")]
    Binding(String),
    /// The parameter-shift rule was requested for a gate without a rotation generator.
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    /// An input has no meaningful normalization (e.g. the zero vector).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    /// A grid case failed validation; `path` names the offending field.
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },
    /// The network cannot be solved (disconnected or singular).
    #[error("topology error: {0}")]
    Topology(String),
    /// A caller broke an API contract (terminal step, empty batch, ...).
    #[error("contract error: {0}")]
    Contract(String),
    /// An exhaustive search exceeds its size guard.
    #[error("size guard: {0}")]
    SizeGuard(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
