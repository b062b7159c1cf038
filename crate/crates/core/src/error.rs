//! Error type shared by every module in this crate.

use std::io;
use std::path::{Path, PathBuf};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while loading, transforming or writing data.
///
/// `Io` signals a failed interaction with the filesystem; every other variant
/// is a validation failure in otherwise readable input.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(
        "line count mismatch: {} has {c_lines} lines, {} has {a_lines}",
        c_path.display(),
        a_path.display()
    )]
    LineCountMismatch {
        c_path: PathBuf,
        a_path: PathBuf,
        c_lines: usize,
        a_lines: usize,
    },

    #[error("line {line}: sentence is empty on exactly one side")]
    OneSidedEmptyLine { line: usize },

    #[error("duplicate form \"{form}\" in entries \"{first}\" and \"{second}\"")]
    DuplicateForm {
        form: String,
        first: String,
        second: String,
    },

    #[error("pair id mismatch: \"{left}\" vs \"{right}\"")]
    PairIdMismatch { left: String, right: String },

    #[error("unknown pair id \"{pair_id}\"")]
    UnknownPairId { pair_id: String },

    #[error("entry \"{canonical}\" has no default relation")]
    MissingDefaultRelation { canonical: String },

    #[error(
        "gold record for pair \"{pair_id}\" span [{start},{end}) matches no projected candidate"
    )]
    UnmatchedGold {
        pair_id: String,
        start: usize,
        end: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Wraps an `io::Error` together with the offending path.
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    /// Builds a `Parse` error for `path` at 1-based `line`.
    pub fn parse(path: impl AsRef<Path>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().to_path_buf(),
            line,
            msg: msg.into(),
        }
    }

    /// True when the error stems from the filesystem rather than from content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
