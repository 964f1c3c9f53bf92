use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max |a_ij - a_ji| = {0:e})")]
    NonSymmetric(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("velocity of particle {particle} is degenerate (|v| = {norm:e}) at t = {time}")]
    DegenerateVelocity {
        particle: usize,
        norm: f64,
        time: f64,
    },

    #[error("state became non-finite at t = {0}")]
    NonFinite(f64),

    #[error("degenerate denominator: {0}")]
    DivisionDegenerate(String),

    #[error("edge set is not symmetric: edge ({0}, {1}) has no reverse")]
    EdgeAsymmetry(usize, usize),

    #[error("unknown envelope kind `{0}`")]
    UnknownKind(String),

    #[error("operation requires 2-dimensional velocities, got dimension {0}")]
    Requires2D(usize),

    #[error("invalid config: {0}")]
    ConfigInvalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps a model error with the scenario it occurred in.
    pub fn in_scenario(self, scenario: &str) -> Self {
        match self {
            e @ Error::Scenario { .. } => e,
            other => Error::Scenario {
                scenario: scenario.to_string(),
                source: Box::new(other),
            },
        }
    }

    /// True for errors caused by invalid input configuration rather than by the
    /// dynamics themselves. The CLI maps these to a distinct exit code.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::ConfigInvalid(_)
            | Error::Parse(_)
            | Error::UnknownKind(_)
            | Error::InvalidSize(_)
            | Error::PreconditionViolated(_)
            | Error::DivisionDegenerate(_) => true,
            Error::Scenario { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}
