use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("energy constraint p+q+r=0 violated by gyrostat(s) {0:?}")]
    Energy(Vec<usize>),
    #[error("size bound exceeded: {0}")]
    SizeBound(String),
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("parameter {0} has no numeric value")]
    Unassigned(String),
    #[error("integration produced a non-finite state at step {0}")]
    NonFinite(usize),
    #[error("symbolic/numeric inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
