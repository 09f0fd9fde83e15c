use std::path::PathBuf;

/// Errors raised across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Caller supplied an argument that violates an operation's preconditions.
    #[error("invalid input: {0}")]
    Input(String),

    /// A text or binary file could not be parsed.
    #[error("parse error in {path}: {location}: {message}")]
    Parse {
        path: PathBuf,
        /// `line N` for text formats, `offset N` for binary ones.
        location: String,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The request exceeds what a routine supports, e.g. a dense solve beyond its size limit.
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// A numerical routine failed (singular system, non-finite values).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The operation is mathematically undefined at the requested parameters.
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse_line(
        path: impl Into<PathBuf>,
        line: usize,
        msg: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            location: format!("line {line}"),
            message: msg.into(),
        }
    }

    pub(crate) fn parse_offset(
        path: impl Into<PathBuf>,
        offset: usize,
        msg: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            location: format!("offset {offset}"),
            message: msg.into(),
        }
    }
}
