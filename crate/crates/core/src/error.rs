use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("entry {value} is not a canonical element of F_{q}")]
    NonCanonical { value: u64, q: u64 },

    #[error("malformed matrix text: {0}")]
    MatrixFormat(String),

    #[error("invalid access structure: {0}")]
    InvalidStructure(String),

    #[error("player {player} out of range 1..={n}")]
    PlayerOutOfRange { player: usize, n: usize },

    #[error("{n} players exceeds the enumeration cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("access structure is not quantum realizable (two disjoint authorized sets)")]
    Unrealizable,

    #[error("access structure is not connected: player {0} occurs in no minimal authorized set")]
    Disconnected(usize),

    #[error("purification check failed: {0}")]
    Purification(String),

    #[error("invalid span program: {0}")]
    InvalidProgram(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid secret distribution: {0}")]
    InvalidSecret(String),

    #[error("malformed chain: {0}")]
    MalformedChain(String),

    #[error("simulation needs {needed} amplitudes, cap is {cap}")]
    SimulationCap { needed: u128, cap: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
