use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alpha = {0} is not admissible (need alpha > -1/2)")]
    AlphaOutOfRange(f64),
    #[error("alpha = {0} is outside the time-change construction range (-1/2, 0]")]
    AlphaOutsideConstruction(f64),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("grid is not a refinement of the original grid: {0}")]
    NotARefinement(String),
    #[error("initial point (0, 0) is excluded")]
    OriginStart,
    #[error("coefficient |x|^alpha is unbounded at x = 0 for alpha = {0}; supply a truncation or floor")]
    UnboundedCoefficient(f64),
    #[error("truncation level n = {0} is invalid")]
    InvalidTruncation(u32),
    #[error("query time {query} exceeds the simulated clock horizon {horizon}")]
    HorizonExceeded { query: f64, horizon: f64 },
    #[error("clock horizon cap of {cap} steps reached before covering t = {target}")]
    HorizonCap { cap: usize, target: f64 },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("input must be sorted: {0}")]
    Unsorted(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
