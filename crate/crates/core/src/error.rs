use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parameters a={a}, b={b} are not coprime")]
    NotCoprime { a: i64, b: i64 },
    #[error("parameters a={a}, b={b} give a degenerate sequence")]
    Degenerate { a: i64, b: i64 },
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("index {n} exceeds the supported maximum {max}")]
    IndexTooLarge { n: u64, max: u64 },
    #[error("valuation of zero is undefined")]
    ZeroArgument,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("prime {p} divides b={b}")]
    PrimeDividesB { p: u64, b: i64 },
    #[error("parameters a={a}, b={b} require a > 0 and a^2 + 4b > 0")]
    NotEligible { a: i64, b: i64 },
    #[error("argument out of range: {0}")]
    BadRange(String),
    #[error("{m} is not coprime to b={b}")]
    NotCoprimeToB { m: String, b: i64 },
    #[error("no index k <= {cap} with m | U_k")]
    NotFound { cap: u64 },
    #[error("{0} exceeds the factoring bound")]
    TooLarge(String),
    #[error("{target} does not divide U_{multiple}")]
    NotAMultiple { target: String, multiple: u64 },
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}
