//! Error type shared by the whole crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, PstError>;

/// Errors raised by transforms, kernels, generators and I/O.
#[derive(Debug)]
pub enum PstError {
    /// Input dimensions are unusable (empty, too small, or mismatched).
    InvalidSize(String),
    /// A parameter violates its documented domain.
    InvalidParameter(String),
    /// Derivative/expansion order is odd or below 2; only even orders exist.
    UnsupportedOrder(usize),
    /// Every sample fell below the denominator floor; nothing to evaluate.
    EmptyDomain,
    /// Index (row, sample, ...) outside the addressed container.
    InvalidIndex(String),
    /// File is not in a recognized format.
    Format(String),
    /// File has a recognized header but the payload is damaged or truncated.
    CorruptFile(String),
    /// Text payload failed to parse; line numbers are 1-based.
    Parse { line: usize, message: String },
    /// Underlying I/O failure.
    Io(std::io::Error),
}

impl fmt::Display for PstError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PstError::InvalidSize(msg) => write!(f, "invalid size: {msg}"),
            PstError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            PstError::UnsupportedOrder(m) => {
                write!(f, "unsupported order {m}: only even orders >= 2 are defined")
            }
            PstError::EmptyDomain => write!(f, "empty domain: all samples are at or below the floor"),
            PstError::InvalidIndex(msg) => write!(f, "invalid index: {msg}"),
            PstError::Format(msg) => write!(f, "unrecognized format: {msg}"),
            PstError::CorruptFile(msg) => write!(f, "corrupt file: {msg}"),
            PstError::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            PstError::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for PstError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            PstError::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for PstError {
    fn from(err: std::io::Error) -> Self {
        PstError::Io(err)
    }
}
