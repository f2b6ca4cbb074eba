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

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A document id that does not carry both languages.
    #[error("document {0:?} is not aligned: only one language present")]
    Alignment(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("document {0:?} has no tokens on either side")]
    EmptyDocument(String),

    #[error("document {0:?} has an empty side; length-ratio interleaving is undefined")]
    EmptySide(String),

    #[error("unknown word {0}")]
    UnknownWord(String),

    #[error("similarity undefined for a zero-norm vector")]
    UndefinedSimilarity,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("context bag has no in-vocabulary words")]
    EmptyContext,

    #[error("paired results differ in length ({0} vs {1})")]
    Pairing(usize, usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
