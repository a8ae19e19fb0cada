use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameters, inputs or configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A function produced a non-finite value (or was asked to evaluate at one).
    #[error("non-finite value in {context} at x = {x}")]
    NonFinite { context: &'static str, x: f64 },

    /// The backward sweep produced a non-finite field value.
    #[error("non-finite field value at time level {level}, grid index {index} (x = {x})")]
    NonFiniteField { level: usize, index: usize, x: f64 },

    /// Command line usage error.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code: 2 for usage/configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => 2,
            _ => 1,
        }
    }
}
