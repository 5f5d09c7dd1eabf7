use thiserror::Error;

/// Errors raised by the library and surfaced by the CLI.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A progression hypothesis (a ≥ 1, a + b ≥ 1, l > m ≥ 0) does not hold.
    #[error("invalid progression: {hypothesis} (got {detail})")]
    InvalidSpec {
        hypothesis: &'static str,
        detail: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An argument that must lie in the reduced residue system does not.
    #[error("{value} is not coprime to modulus {modulus}")]
    NotCoprime { value: i64, modulus: i64 },

    /// The requested computation exceeds the configured sieve budget.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Two independent computations disagreed.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
