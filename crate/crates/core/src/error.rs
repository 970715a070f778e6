//! Error type shared by the whole pipeline.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// File could not be opened or read.
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// WAV stream exists but uses a codec or bit depth we do not decode.
    #[error("unsupported WAV encoding in {path}: {detail}")]
    UnsupportedWav { path: String, detail: String },

    /// WAV file decoded to zero samples.
    #[error("zero-length audio stream: {path}")]
    EmptyAudio { path: String },

    /// Malformed WAV container.
    #[error("malformed WAV {path}: {detail}")]
    MalformedWav { path: String, detail: String },

    /// CSV structure problem (missing header, wrong arity, bad cell).
    #[error("invalid {what} in {path} at line {line}: {detail}")]
    InvalidRow {
        what: &'static str,
        path: String,
        line: u64,
        detail: String,
    },

    /// The same clip_id appeared twice in one file.
    #[error("duplicate clip_id {clip_id:?} in {path}")]
    DuplicateClip { clip_id: String, path: String },

    /// Label token outside the seven known classes.
    #[error("unknown emotion label {token:?}")]
    UnknownLabel { token: String },

    /// Split token outside {{train, validation, test}}.
    #[error("unknown split {token:?}")]
    UnknownSplit { token: String },

    /// A train or validation row without a label.
    #[error("missing label for {split} clip {clip_id:?}")]
    MissingLabel { clip_id: String, split: String },

    /// Clip too short to produce a single analysis window.
    #[error("clip {clip_id:?} is {duration_ms} ms, shorter than one {window_ms} ms window")]
    ClipTooShort {
        clip_id: String,
        duration_ms: u64,
        window_ms: u32,
    },

    /// Non-finite sample or feature value.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    /// Mismatched vector/matrix dimensions.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },

    /// Functional name outside the supported bank.
    #[error("unknown functional {name:?}")]
    UnknownFunctional { name: String },

    /// Training set does not satisfy a trainer precondition.
    #[error("invalid training set: {detail}")]
    InvalidTrainingSet { detail: String },

    /// Training diverged to a non-finite loss.
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    /// Clip sets do not line up between two inputs.
    #[error("clip coverage mismatch in {context}: missing {missing:?}")]
    CoverageMismatch {
        context: String,
        missing: Vec<String>,
    },

    /// Fusion weights do not match the score sets.
    #[error("fusion weight/model mismatch: {detail}")]
    WeightMismatch { detail: String },

    /// Metrics requested on an empty clip set.
    #[error("no clips to evaluate")]
    EmptyEvaluation,

    /// Serialized model/feature container is not in the expected format.
    #[error("invalid {format} container in {path}: {detail}")]
    BadContainer {
        format: &'static str,
        path: String,
        detail: String,
    },

    /// Generic precondition violation.
    #[error("{0}")]
    Precondition(String),

    /// Any error, annotated with the clip it occurred on.
    #[error("clip {clip_id:?}: {source}")]
    WithClip {
        clip_id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Annotates an error with the clip it happened on.
    pub fn for_clip(self, clip_id: impl Into<String>) -> Self {
        Error::WithClip {
            clip_id: clip_id.into(),
            source: Box::new(self),
        }
    }
}
