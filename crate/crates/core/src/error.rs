//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Error`]. The CLI maps
//! error categories onto process exit codes, so [`Error::category`] keeps
//! that mapping in one place.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error category used for exit-code mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad input data, configuration, or state.
    Data,
    /// An external plugin process misbehaved.
    Plugin,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate article id `{0}`")]
    DuplicateArticle(String),

    #[error("duplicate comment id `{0}`")]
    DuplicateComment(String),

    #[error("comment `{comment_id}` references unknown article `{article_id}`")]
    DanglingReference {
        comment_id: String,
        article_id: String,
    },

    #[error("line {line}: comment `{comment_id}` references article `{article_id}` before its definition")]
    UseBeforeDefinition {
        line: usize,
        comment_id: String,
        article_id: String,
    },

    #[error("article `{0}` has an empty title after normalization")]
    EmptyTitle(String),

    #[error("comment `{0}` has an empty body after normalization")]
    EmptyBody(String),

    #[error("timeline of length {len} cannot be split into three non-empty parts")]
    TimelineTooShort { len: usize },

    #[error("unknown labeler `{0}`")]
    UnknownLabeler(String),

    #[error("comment `{comment_id}` has no score from labeler `{labeler}`")]
    MissingScore {
        comment_id: String,
        labeler: String,
    },

    #[error("plugin error: {0}")]
    Plugin(String),

    #[error("plugin request timed out after {0:?}")]
    PluginTimeout(std::time::Duration),

    #[error("empty text cannot be encoded")]
    EmptyText,

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("target at position {0} has no prior history")]
    EmptyHistory(usize),

    #[error("empty window")]
    EmptyWindow,

    #[error("empty sequence")]
    EmptySequence,

    #[error("label {label} outside class set of size {classes}")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("no trainable examples (all histories empty)")]
    NoExamples,

    #[error("metric over empty input is undefined")]
    EmptyMetricInput,

    #[error("prediction/gold length mismatch: {preds} vs {golds}")]
    MetricLengthMismatch { preds: usize, golds: usize },

    #[error("need at least {needed} users with fingerprints, got {got}")]
    NotEnoughUsers { needed: usize, got: usize },

    #[error("generation error: {0}")]
    Generation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Plugin(_) | Error::PluginTimeout(_) => ErrorCategory::Plugin,
            _ => ErrorCategory::Data,
        }
    }
}
