use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// The variants follow the failure classes of the domain (sizes, dimensions,
/// probabilities, image geometry, retrieval consistency, text formats) so
/// that front ends can map them onto exit codes without string matching.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("probability error: {0}")]
    Probability(String),
    #[error("operator error: {0}")]
    Operator(String),
    #[error("normalization error: {0}")]
    Normalization(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("coordinate error: {0}")]
    Coordinate(String),
    #[error("overlap error: {0}")]
    Overlap(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("mode error: {0}")]
    Mode(String),
    #[error("oracle error: {0}")]
    Oracle(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
