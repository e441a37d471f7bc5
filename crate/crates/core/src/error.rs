use thiserror::Error;

/// Errors raised by the exact-arithmetic engine and the verification layers built on it.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("incompatible cyclotomic moduli: {from} does not divide {to}")]
    IncompatibleModuli { from: u64, to: u64 },

    #[error("ramified modulus unsupported: p = {p} divides the cyclotomic modulus {modulus}")]
    RamifiedModulus { p: u64, modulus: u64 },

    #[error("inexact division")]
    InexactDivision,

    #[error("division by zero")]
    DivisionByZero,

    #[error("pi exponent mismatch in addition: {0} vs {1}")]
    PiExponentMismatch(i64, i64),

    #[error("invalid character: {0}")]
    InvalidCharacter(String),

    #[error("gauss sum of an imprimitive character (modulus {modulus}, conductor {conductor})")]
    ImprimitiveCharacter { modulus: u64, conductor: u64 },

    #[error("bracket vanishes by parity: the L(k−n, η_h) formula does not apply")]
    ParityMismatch,

    #[error("singular matrix")]
    SingularMatrix,

    #[error("dyadic classification out of scope")]
    Dyadic,

    #[error("brute-force budget exceeded: {needed} terms requested, cap is {cap}")]
    BudgetExceeded { needed: u128, cap: u128 },

    #[error("factorization of B_p violated: {0}")]
    FactorizationViolated(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
