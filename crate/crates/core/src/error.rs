use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("{0} is not congruent to 1 mod 4")]
    NotOneMod4(String),
    #[error("Jacobi symbol needs an odd positive second argument, got {0}")]
    BadJacobiModulus(String),
    #[error("modulus {0} is not an odd prime")]
    BadSqrtModulus(String),
    #[error("{0} is not squarefree")]
    NotSquarefree(String),
    #[error("the two primes of a pair must be distinct")]
    EqualPrimes,
    #[error("division by zero field element")]
    DivisionByZero,
    #[error("{0} is not a subfield compatible with this operation")]
    BadSubfield(String),
    #[error("element support is not contained in the requested subfield")]
    OutsideSubfield,
    #[error("Gaussian decomposition failed: {0}")]
    DecompositionFailed(String),
    #[error("no squarefree divisor D of 2d makes D(x+{0}) and its mate squares")]
    NoPellFactor(String),
    #[error("unit norms contradict the expected case split: {0}")]
    InconsistentSfuCase(String),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamentalDiscriminant(i64),
    #[error("discriminant {0} exceeds the supported enumeration range")]
    DiscriminantTooLarge(String),
    #[error("Kuroda check not applicable: {0}")]
    KurodaNotApplicable(String),
    #[error("computed capitulation set is not a subgroup of F2^3")]
    NotASubgroup,
    #[error("identity hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("internal arithmetic inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
