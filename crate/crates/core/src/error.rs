use thiserror::Error;

/// Errors raised by the planning library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("off corridor: |d| = {offset:.3} m exceeds corridor half-width {corridor:.3} m")]
    OffCorridor { offset: f64, corridor: f64 },

    #[error("singular offset curve: d * kappa = {0:.3} reaches the 0.95 guard")]
    Singular(f64),

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("scenario error at `{path}`: {message}")]
    Scenario { path: String, message: String },

    #[error("dangling lane reference `{lane}` at `{path}`")]
    DanglingLane { lane: String, path: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
