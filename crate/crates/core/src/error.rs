use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A line of a text catalog or table could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A multi-line record (NDK) could not be parsed.
    #[error("record {index}: {message}")]
    Record { index: usize, message: String },

    /// The input as a whole does not have the expected layout.
    #[error("format error: {0}")]
    Format(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Exhaustive enumeration was refused because the input is too large.
    #[error("enumeration guard: {n} events exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    /// Spatial cells do not partition the region.
    #[error("partition violation: {0}")]
    Partition(String),

    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by malformed input data rather than bad configuration.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Record { .. } | Error::Format(_) | Error::Io(_)
        )
    }
}
