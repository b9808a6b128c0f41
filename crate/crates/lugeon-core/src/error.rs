use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("line {line}, field `{field}`: {reason}")]
    RowParse {
        line: usize,
        field: String,
        reason: String,
    },

    #[error("feature `{0}` is degenerate: max equals min")]
    DegenerateFeature(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("need at least {needed} distinct values, found {found}")]
    TooFewDistinctValues { needed: usize, found: usize },

    #[error("least-squares system is singular even with ridge fallback")]
    SingularSystem,

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("unknown object `{0}`")]
    UnknownObject(String),

    #[error("{0} attributes exceed the exhaustive reduct-search cap of {1}")]
    TooManyAttributes(usize, usize),

    #[error("no candidate met both feasibility criteria; the aggregated box is attached")]
    NoFeasibleCandidate(Box<crate::pipeline::AggregatedBox>),

    #[error("aggregated box is empty")]
    EmptyBox,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("model file is malformed: {0}")]
    MalformedModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
