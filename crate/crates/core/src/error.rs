use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user input: domain bounds, mesh, degrees, level specs, ...
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A linear system could not be solved at the given parameter point.
    #[error("singular system at y = {y:?}: {context}")]
    Singular { y: Vec<f64>, context: String },

    #[error("stability lower bound unavailable: {0}")]
    StabilityUnavailable(String),

    #[error("not enough samples: {0}")]
    InsufficientSamples(String),

    #[error("estimator diverged: {0}")]
    Diverged(String),

    #[error("malformed model file (line {line}): {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
