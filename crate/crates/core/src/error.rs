use thiserror::Error;

/// Errors reported by generator construction and the protected pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("polynomial degree must be at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("internal tap set must not be empty")]
    EmptyTaps,
    #[error("tap {tap} outside valid range 1..={max}")]
    TapOutOfRange { tap: usize, max: usize },
    #[error("duplicate tap {0}")]
    DuplicateTap(usize),
    #[error("seed length {got} does not match polynomial degree {want}")]
    SeedLengthMismatch { want: usize, got: usize },
    #[error("block span must be at least 1")]
    SpanTooSmall,
    #[error("dimension mismatch: expected {want}, got {got}")]
    DimensionMismatch { want: usize, got: usize },
    #[error("at least one check selector is required")]
    NoSelectors,
    #[error("check selectors are linearly dependent")]
    DependentSelectors,
    #[error("invalid bit character {0:?}, expected '0' or '1'")]
    InvalidBitChar(char),
    #[error("empty bit string")]
    EmptyBitString,
    #[error("modulus {0} must be at least 2")]
    ModulusTooSmall(u64),
    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),
    #[error("moduli must be strictly ascending: {0} precedes {1}")]
    ModuliNotAscending(u64, u64),
    #[error("information moduli list is empty")]
    NoInfoModuli,
    #[error("redundant moduli list is empty")]
    NoRedundantModuli,
    #[error("operating range {range} does not cover {bits} value bits")]
    RangeTooSmall { range: String, bits: u64 },
    #[error("no channel with modulus {0}")]
    NoSuchChannel(u64),
    #[error("channel index {0} out of range")]
    ChannelOutOfRange(usize),
    #[error("localization requires at least 2 redundant moduli, have {0}")]
    InsufficientRedundancy(usize),
    #[error("excluding modulus {0} would leave the operating range below the value width")]
    ExclusionBreaksRange(u64),
    #[error("cannot build moduli automatically: not enough precomputed primes")]
    AutoModuliExhausted,
    #[error("fault position {pos} out of range for width {width}")]
    FaultOutOfRange { pos: usize, width: usize },
    #[error("fault target {0} does not apply to the {1} pipeline")]
    FaultNotApplicable(String, String),
    #[error("campaign requires at least one trial")]
    NoTrials,
    #[error("stream length must be positive")]
    EmptyRun,
}

pub type Result<T> = std::result::Result<T, Error>;
