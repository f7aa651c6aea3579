use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate in point")]
    NonFinite,

    #[error("a curve needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("consecutive duplicate vertex at index {0}")]
    DuplicateVertex(usize),

    #[error("endpoint mismatch of {gap:e} between curve {index} and its successor")]
    EndpointMismatch { index: usize, gap: f64 },

    #[error("wraparound restriction requested on an open curve")]
    WraparoundOnOpenCurve,

    #[error("empty parameter interval: t = t' = {0}")]
    EmptyInterval(f64),

    #[error("parameter {t} outside [0, {length}]")]
    ParameterOutOfRange { t: f64, length: f64 },

    #[error("operation requires a closed curve")]
    NotClosed,

    #[error("operation requires a curve of positive length")]
    ZeroLength,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("flow is not divergence free: node {node} has residual {residual:e}")]
    NonConservativeFlow { node: usize, residual: f64 },

    #[error("boundary residual {0:e} is nonzero")]
    NonzeroBoundary(f64),

    #[error("{bound}: certified value {value} exceeds limit {limit}")]
    CutVerification {
        bound: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("step budget exceeded: {0}")]
    StepBudget(String),

    #[error("test form audit failed: {0}")]
    FormAudit(String),
}
