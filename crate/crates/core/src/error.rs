use thiserror::Error;

/// Errors produced by the reconciliation library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    CompositeP(u64),
    #[error("checksum range {0} is not a power of two >= 2")]
    InvalidChecksumRange(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("value {value} does not fit in {width} base-{p} digits")]
    Overflow { value: u64, width: usize, p: u64 },
    #[error("decoded vector lies outside the value domain")]
    OutOfDomain,
    #[error("vector has {got} digits, expected {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("k = {0} is unsupported (expected 3..=7)")]
    UnsupportedK(usize),
    #[error("invalid sizing parameter: {0}")]
    InvalidSize(String),
    #[error("party index {party} out of range for ids width {width}")]
    InvalidParty { party: usize, width: usize },
    #[error("sketch configurations differ: {0}")]
    ConfigMismatch(String),
    #[error("second coefficient sum is zero")]
    ZeroBeta,
    #[error("{n} participants exceed field characteristic {p}")]
    TooManyParties { n: usize, p: u64 },
    #[error("ids field is poisoned by scaling")]
    IdsPoisoned,
    #[error("ids parity ({bits} bits set) disagrees with multiplicity {multiplicity}")]
    ParityMismatch { bits: usize, multiplicity: u64 },
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("malformed topology: {0}")]
    MalformedTopology(String),
    #[error("graph still disconnected after {0} resamples")]
    DisconnectedAfterRetries(usize),
    #[error("malformed wire data: {0}")]
    Wire(String),
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
