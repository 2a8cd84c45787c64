use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {n} outside the supported range 1..={max}")]
    InvalidDimension { n: usize, max: usize },

    #[error("non-finite value in matrix entry")]
    NonFinite,

    #[error("matrix is not upper triangular Toeplitz (deviation {deviation:e} > tolerance {tolerance:e})")]
    NotUpperToeplitz { deviation: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("multi-index has {found} components but the tuple has {expected} members")]
    ExponentArityMismatch { expected: usize, found: usize },

    #[error("parts sum to {sum} but the total is {total}")]
    PartsSumMismatch { total: u64, sum: u64 },

    #[error("leading coefficient of member {index} is zero")]
    ZeroLeadingCoefficient { index: usize },

    #[error("closed-form lemma entries exist only for n in 2..=4, got n = {n}")]
    UnsupportedDimension { n: usize },

    #[error("eigenvalue clusters are ambiguous (separation {separation:e}, tolerance {tolerance:e})")]
    ClusterAmbiguity { separation: f64, tolerance: f64 },

    #[error("matrix is not cyclic: eigenvalue {re}+{im}i has geometric multiplicity {geometric}")]
    NotCyclic { re: f64, im: f64, geometric: usize },

    #[error("generalized eigenvector chain is ill-conditioned (residual {residual:e})")]
    IllConditionedChain { residual: f64 },

    #[error("members {i} and {j} do not commute (relative commutator {commutator:e})")]
    NotCommuting { i: usize, j: usize, commutator: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("orbit enumeration of {requested} points exceeds the budget of {limit}")]
    BudgetExceeded { requested: u64, limit: u64 },

    #[error("coverage grid with {cells} cells exceeds the limit of {limit}")]
    GridTooLarge { cells: f64, limit: u64 },

    #[error("last coordinate of the initial vector is zero")]
    ZeroLastCoordinate,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of a numerical hypothesis (as opposed to malformed input).
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::NotUpperToeplitz { .. }
                | Error::ZeroLeadingCoefficient { .. }
                | Error::ClusterAmbiguity { .. }
                | Error::NotCyclic { .. }
                | Error::IllConditionedChain { .. }
                | Error::NotCommuting { .. }
                | Error::ZeroLastCoordinate
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
