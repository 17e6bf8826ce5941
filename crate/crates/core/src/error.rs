use std::path::PathBuf;

/// Errors produced by the decoding toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input too short: need at least {required} samples, got {actual}")]
    TooShort { required: usize, actual: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("missing channels: {}", .0.join(", "))]
    MissingChannels(Vec<String>),

    #[error("channel {0} has no source electrode within 90 degrees")]
    NoNeighbours(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("zero variance input: {0}")]
    ZeroVariance(&'static str),

    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
