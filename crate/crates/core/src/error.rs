use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in input at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },

    #[error("row {row} is the zero vector; cosine distance is undefined")]
    ZeroVectorUnderCosine { row: usize },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("invalid distance matrix: {0}")]
    InvalidDistance(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid selection: {0}")]
    InvalidSelection(String),

    #[error("index {index} out of range for pool of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),

    #[error("transport solver failed: {0}")]
    SolverFailure(String),

    #[error("master problem is infeasible")]
    MasterInfeasible,

    #[error("master problem hit its time limit before finding a feasible selection")]
    MasterNoIncumbent,

    #[error("invalid master problem: {0}")]
    InvalidMaster(String),

    #[error("enumeration too large: {count} candidate subsets exceed the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
