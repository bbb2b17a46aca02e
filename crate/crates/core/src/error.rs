use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed token in an analyzed-stream line. Columns are 1-based
    /// character offsets, token indices 1-based.
    #[error("token {token}, column {column}: {message}")]
    Stream {
        token: usize,
        column: usize,
        message: String,
    },

    #[error("{path}:{line}: {message}")]
    Corpus {
        path: String,
        line: usize,
        message: String,
    },

    #[error(
        "line count mismatch: {source_path} has {source_lines} lines, \
         {target_path} has {target_lines}"
    )]
    LineCountMismatch {
        source_path: String,
        source_lines: usize,
        target_path: String,
        target_lines: usize,
    },

    #[error("alignment line {line}: {message}")]
    Alignment { line: usize, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("dictionary entry {index}: {message}")]
    Dictionary { index: usize, message: String },

    #[error("dictionary: {0}")]
    DictionaryFormat(String),

    #[error("{what} line {line}: {message}")]
    Format {
        what: &'static str,
        line: usize,
        message: String,
    },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
