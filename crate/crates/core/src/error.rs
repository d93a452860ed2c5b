use thiserror::Error;

/// Errors raised by the geometry, solver and construction layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vector has non-finite components: {0:?}")]
    NonFinite([f64; 3]),

    #[error("vector is not unit length (norm {norm}, tolerance {tol})")]
    NotUnit { norm: f64, tol: f64 },

    #[error("cannot normalize the zero vector")]
    ZeroVector,

    #[error("degenerate pair: overlap {overlap} must lie strictly inside (0, 1)")]
    DegeneratePair { overlap: f64 },

    #[error("numeric domain error in {what}: value {value}")]
    NumericDomain { what: &'static str, value: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("duplicate observable id `{0}`")]
    DuplicateId(String),

    #[error("unknown observable id `{0}`")]
    UnknownId(String),

    #[error("malformed context: {0}")]
    MalformedContext(String),

    #[error("contradictory premises on `{0}`")]
    ContradictoryPremises(String),

    #[error("search budget of {0} nodes exceeded")]
    SearchBudgetExceeded(u64),

    #[error("iteration budget of {0} steps exceeded")]
    IterationBudgetExceeded(usize),

    #[error("gadget realization failed: {0}")]
    GadgetRealizationFailed(String),

    #[error("invalid data: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Data(e.to_string())
    }
}
