use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("numeral base must be at least 2, got {0}")]
    InvalidBase(u32),
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),
    #[error("malformed numeral: {0}")]
    MalformedNumeral(String),
    #[error("invalid interval: lower endpoint exceeds upper endpoint")]
    InvalidInterval,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("budget count {count} exceeds solver limit {limit}")]
    BudgetLimit { count: usize, limit: usize },
    #[error("depth {depth} exceeds limit {limit}")]
    DepthLimit { depth: usize, limit: usize },
    #[error("index {index} is not a child of node {parent}")]
    NotAChild { parent: String, index: String },
    #[error("host interval too short for spacing placement")]
    HostTooShort,
    #[error("horizon exceeded: {0}")]
    HorizonExceeded(String),
    #[error("epsilon 1/{0} is not an exact power of the family base")]
    InexpressibleEpsilon(u64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("hypothesis not certified: {0}")]
    Uncertified(String),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
