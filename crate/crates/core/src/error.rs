use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} index {index} out of range 1..={max}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("invalid channel model: {0}")]
    InvalidModel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed constraint system: {0}")]
    MalformedSystem(String),

    #[error("variable mismatch: {0}")]
    VariableMismatch(String),

    #[error(
        "{count} permutation tuples exceed the cap of {cap}; raise the cap or evaluate an explicit tuple subset"
    )]
    TupleCapExceeded { count: u128, cap: u64 },

    #[error("model restriction: {0}")]
    ModelRestriction(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid relay graph: {0}")]
    InvalidGraph(String),

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("field: {0}")]
    Field(String),
}
