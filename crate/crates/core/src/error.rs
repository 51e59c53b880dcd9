use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("vertex {vertex} out of range for order {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("bijection maps vertex {0} to a vertex of a different colour")]
    ColourViolation(usize),

    #[error("colour histograms differ, no colour-preserving bijection exists")]
    ColourHistogramMismatch,

    #[error("order {n} exceeds the brute-force cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("work budget exceeded for {what}: needs {needed}, budget {budget}")]
    BudgetExceeded { what: String, needed: u128, budget: u128 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("weighted graphs are not accepted here, use the weighted reduction")]
    WeightedInput,

    #[error("epsilon-approximation verification failed after {0} attempts")]
    ApproximationFailed(usize),

    #[error("LP solver failure: {0}")]
    Numerical(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn budget(what: impl Into<String>, needed: u128, budget: u128) -> Self {
        Error::BudgetExceeded {
            what: what.into(),
            needed,
            budget,
        }
    }
}
