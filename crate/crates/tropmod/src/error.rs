//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong: bad domain parameters, infeasible
/// brute-force requests, and internal consistency failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// p was not an admissible prime (p >= 5 and prime).
    #[error("invalid prime p = {0}: need a prime p >= 5 (p = 2, 3 are excluded)")]
    BadPrime(u64),
    /// Parameters violated a structural precondition (message names it).
    #[error("{0}")]
    Domain(String),
    /// A reduction target that does not divide the source modulus.
    #[error("invalid reduction target: {target} does not divide {from}")]
    BadReductionTarget { from: u64, target: u64 },
    /// Two values with different moduli were combined.
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    /// A brute-force enumeration would exceed the configured cap.
    #[error("enumeration infeasible: size {needed} exceeds cap {cap}")]
    CapExceeded { needed: u64, cap: u64 },
    /// A monodromy labeling whose region orbits are not refined by the
    /// orbits at the bounding breakpoint.
    #[error("invalid labeling: {0}")]
    InvalidLabeling(String),
    /// A scale that does not clear the denominators of a length pairing.
    #[error("normalization insufficient: entry {0} is not integral at scale {1}")]
    NormalizationInsufficient(String, String),
    /// Krir normalization requested where it is undefined.
    #[error("Krir normalization undefined; supply explicit scale")]
    KrirUndefined,
    /// Ladder cycle basis requested without a type-1 base edge.
    #[error("no type-1 base edge")]
    NoBaseEdge,
    /// Ladder-form matrix requested where the ladder does not exist.
    #[error("ladder basis unavailable; use graph path")]
    LadderUnavailable,
    /// Closed-form component group requested outside its range of validity.
    #[error("outside theorem range; use component_group")]
    OutsideTheoremRange,
    /// Subgroup pair that is not in the built-in containment table.
    #[error("non-nested pair: {0} is not contained in {1}")]
    NotNested(String, String),
    /// Two independent computations of the same quantity disagree.
    #[error("internal consistency failure: {0}")]
    Inconsistency(String),
}

impl Error {
    /// Shorthand for a domain error with a formatted message.
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
