use std::path::PathBuf;

/// Error type shared by every module in the crate.
///
/// The variants map onto the process exit codes used by the CLI:
/// `Parameter` and `Contract` are caller mistakes (usage), `Io` and
/// `Format` are file problems, `Numerical` is a training/evaluation
/// abort (non-finite values).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violated an operation's preconditions.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An API contract was violated (e.g. backward on a non-scalar node).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A non-finite value surfaced where the pipeline cannot continue.
    #[error("numerical abort: {0}")]
    Numerical(String),

    /// Filesystem failure; the path is always included.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A manifest or blob failed to parse. For blob corruption the
    /// message names the file and byte offset.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
