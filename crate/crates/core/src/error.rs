use thiserror::Error;

use crate::cone::LatticeVector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid slice: {0}")]
    InvalidSlice(String),

    #[error("point {point} is outside the map's domain: {reason}")]
    Domain { point: LatticeVector, reason: String },

    #[error("certification failed: {reason}")]
    CertificationFailed {
        reason: String,
        witness: Vec<LatticeVector>,
    },

    #[error("{pairs} pairs exceed the exhaustive cap of {cap}; use sampling mode")]
    TooLarge { pairs: u128, cap: u128 },

    #[error("AIMD step infeasible: sum of ceilings at T = 0 is {sum} > capacity {capacity}")]
    InfeasibleStep { sum: u128, capacity: u64 },

    #[error("AIMD step unbounded: no breakpoint ever exceeds capacity {capacity}")]
    UnboundedStep { capacity: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integer overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("approximation bound violated: distance {distance} exceeds 2/{k}")]
    ApproximationBound { distance: String, k: u64 },
}

impl Error {
    pub(crate) fn domain(point: &LatticeVector, reason: impl Into<String>) -> Self {
        Error::Domain {
            point: point.clone(),
            reason: reason.into(),
        }
    }

    pub(crate) fn certification(reason: impl Into<String>, witness: Vec<LatticeVector>) -> Self {
        Error::CertificationFailed {
            reason: reason.into(),
            witness,
        }
    }
}
