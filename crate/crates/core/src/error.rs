use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A metric that needs a heading was evaluated on a bird with zero velocity.
    #[error("bird {bird} has zero velocity, heading is undefined")]
    UndefinedHeading { bird: usize },

    #[error("could not generate a configuration after {attempts} attempts: {constraint}")]
    Generation { attempts: usize, constraint: String },

    #[error("objective returned non-finite value {value} at {position:?}")]
    NonFiniteObjective { value: f64, position: Vec<f64> },

    #[error("clone {clone}: {source}")]
    Clone {
        clone: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("corrupt trajectory history: {0}")]
    CorruptHistory(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
