use thiserror::Error;

/// Failure modes shared across all modules.
///
/// Hypothesis violations are ordinary values here, not panics: sweeps
/// convert them into skipped-prime records instead of dying mid-run.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime")]
    InvalidModulus(u64),
    #[error("no representation found: {0}")]
    NoRepresentation(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("prime {p} skipped: {reason}")]
    SkippedPrime { p: u64, reason: String },
    #[error("empty sweep: {0}")]
    EmptySweep(String),
    #[error("invalid residue class: {0}")]
    InvalidResidue(String),
    #[error("invalid torsion parameters: {0}")]
    InvalidTorsion(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("degenerate main term: {0}")]
    DegenerateMainTerm(String),
}

pub type Result<T> = std::result::Result<T, Error>;
