use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("model index {index} out of range for {n_models} models")]
    ModelIndex { index: usize, n_models: usize },
    #[error("combined column requested but the table has none")]
    MissingCombined,
    #[error("position sets overlap or exceed arity {arity}")]
    InvalidPositions { arity: usize },
    #[error("subset size k must be at least 1 (got {0})")]
    InvalidSubsetSize(usize),
    #[error("{name} = {value} is outside its domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("division by a zero baseline in {0}")]
    ZeroBaseline(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("concentration undefined: I(O;Y) is zero")]
    UndefinedConcentration,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("too few instances: {0}")]
    TooFewInstances(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
