use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Operands or parameters that do not fit together (mismatched rings,
    /// out-of-window modes, inconsistent scenario settings).
    #[error("configuration error: {0}")]
    Config(String),

    /// A mode window or p-window is too small for the requested computation.
    #[error("window too small: {what}; need {required}")]
    Window { what: String, required: String },

    /// Series division by a tau-function with vanishing constant term.
    #[error("non-normalizable tau at p = {p}")]
    NonNormalizable { p: i64 },

    /// Arguments outside the domain where an identity is asserted.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn window(what: impl Into<String>, required: impl Into<String>) -> Self {
        Error::Window {
            what: what.into(),
            required: required.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
