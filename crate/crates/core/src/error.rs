use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("node index {index} out of range for a network with {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("self-pair ({0}, {0}) supplied; self-loops are added internally")]
    SelfLoop(usize),

    #[error("degenerate assignment: {treated} treated and {control} control units")]
    DegenerateAssignment { treated: usize, control: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("prior is not integrable: {0}")]
    NonIntegrablePrior(String),

    #[error("exhaustive search is capped at {max} units, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by bad input rather than by the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
