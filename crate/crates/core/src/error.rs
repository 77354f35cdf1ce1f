use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: field `{field}`: {message}")]
    Record {
        line: usize,
        field: String,
        message: String,
    },

    #[error("duplicate document id `{id}` at records {first} and {second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },

    #[error("IOB row {row}: unknown tag `{tag}`")]
    UnknownTag { row: usize, tag: String },

    #[error("IOB row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("overlapping spans [{}, {}) and [{}, {})", .first.0, .first.1, .second.0, .second.1)]
    OverlappingSpans {
        first: (usize, usize),
        second: (usize, usize),
    },

    #[error("span [{start}, {end}) does not align with whitespace token boundaries")]
    MisalignedSpan { start: usize, end: usize },

    #[error("invalid occurrence in `{doc_id}`: {message}")]
    InvalidOccurrence { doc_id: String, message: String },

    #[error("search surface is empty")]
    EmptySurface,

    #[error("unknown document id `{0}`")]
    UnknownDocument(String),

    #[error("corpus term list is missing {count} annotated term(s), e.g. `{example}`")]
    GoldNotSuperset { count: usize, example: String },

    #[error("occurrence-level scoring needs predicted spans; run document consistency first or supply span predictions")]
    MissingSpans,

    #[error("no documents to compute statistics over")]
    EmptyCorpus,

    #[error("label sequences differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch for point `{id}`: expected {expected}, found {found}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("endpoint error: {0}")]
    Endpoint(String),

    #[error("could not classify entity type `{type_name}`; last response: {raw_response:?}")]
    Classification {
        type_name: String,
        raw_response: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn record(line: usize, field: &str, message: impl Into<String>) -> Self {
        Error::Record {
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// True for failures caused by the remote completion endpoint rather than
    /// by the caller's input.
    pub fn is_endpoint_failure(&self) -> bool {
        matches!(self, Error::Endpoint(_) | Error::Classification { .. })
    }
}
