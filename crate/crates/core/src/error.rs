use thiserror::Error;

use crate::spaces::Point;

/// Errors produced anywhere in the toolkit.
///
/// The variants map onto the command-line exit codes: rejected input and
/// catalog lookups are validation failures, `Internal` is an invariant
/// breach.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    Rejected(String),

    #[error("point {point} lies outside the domain: {reason}")]
    Domain { point: Point, reason: String },

    #[error("construction failed at ({x}, {y}): {reason}")]
    Construction { x: Point, y: Point, reason: String },

    #[error("unknown fixture `{name}`; valid names: {}", valid.join(", "))]
    UnknownFixture { name: String, valid: Vec<String> },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant breached: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn rejected(msg: impl Into<String>) -> Self {
        Error::Rejected(msg.into())
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors caused by the caller's input rather than by a
    /// failure inside the toolkit.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Rejected(_)
            | Error::Domain { .. }
            | Error::Construction { .. }
            | Error::UnknownFixture { .. }
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Io(_) => true,
            Error::Stage { source, .. } => source.is_validation(),
            Error::Internal(_) => false,
        }
    }
}
