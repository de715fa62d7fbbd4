use std::path::PathBuf;

/// Errors produced by the corpus, tokenization, evaluation, and retrieval
/// layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line count mismatch: {source_path} has {source_lines} lines, {target_path} has {target_lines}")]
    Alignment {
        source_path: PathBuf,
        target_path: PathBuf,
        source_lines: usize,
        target_lines: usize,
    },

    #[error("invalid UTF-8 in {path} at byte offset {offset}")]
    Decode { path: PathBuf, offset: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed model file at line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("token not in vocabulary: {0:?}")]
    UnknownToken(String),

    #[error("hypothesis/reference length mismatch: {hypotheses} vs {references}")]
    LengthMismatch {
        hypotheses: usize,
        references: usize,
    },

    #[error("empty input: at least one sentence pair is required")]
    EmptyInput,

    #[error("missing hypothesis sets for directions: {0}")]
    MissingDirections(String),

    #[error("index was built with embedder {expected:?}, got {found:?}")]
    EmbedderMismatch { expected: String, found: String },

    #[error("backend error{}: {message}", status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Backend {
        status: Option<u16>,
        message: String,
        retriable: bool,
    },

    #[error("backend returned an empty completion")]
    EmptyCompletion,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
