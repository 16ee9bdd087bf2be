use thiserror::Error;

/// Errors raised by the algebra layer, the elimination engine and the
/// problem builders.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("variable table order violated: {0}")]
    BadOrder(String),

    #[error("substitution for `{0}` mentions the variable itself")]
    SelfSubstitution(String),

    #[error("exponent arithmetic overflowed 64 bits")]
    ExponentOverflow,

    /// Two denominator factors stopped being coprime; slack insertion was
    /// skipped or defeated.
    #[error("non-coprime collision: denominator factor reduced to 1 - 1 while eliminating `{var}`")]
    Collision { var: String },

    #[error("no valid slack substitution found after {attempts} attempts ({violations} violated factors)")]
    LambdaExhausted { attempts: usize, violations: usize },

    #[error("invalid slack substitution: a denominator factor became identically zero")]
    InvalidLambda,

    #[error("prime clash: {0}")]
    PrimeClash(String),

    #[error("{0} is not an odd prime")]
    NotPrime(u64),

    #[error("moduli are not pairwise coprime")]
    NonCoprimeModuli,

    #[error("oracle refused: {0}")]
    OracleRefused(String),

    #[error("polytope is unbounded (homogeneous system has a nonzero solution)")]
    Unbounded,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("result is not integral: {0}")]
    NotIntegral(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
