use thiserror::Error;

/// Errors produced by measure construction, transport solves and the
/// embedding/analysis routines built on top of them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The transport simplex exhausted its pivot budget before reaching an
    /// optimal basis. `objective` is the cost of the last feasible plan.
    #[error(
        "transport solver did not converge after {iterations} pivots (best objective {objective})"
    )]
    NotConverged { iterations: usize, objective: f64 },

    #[error("assignment does not push the source weights onto the target weights: {0}")]
    InfeasibleAssignment(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample {id}: {source}")]
    Sample {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn for_sample(self, id: &str) -> Error {
        Error::Sample {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
