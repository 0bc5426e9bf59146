use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence length {0} is not a positive multiple of 6")]
    LengthNotMultipleOfSix(usize),

    #[error("basic sequence length {0} is not coprime to 6")]
    LengthNotCoprimeToSix(usize),

    #[error("invalid ternary symbol {0}")]
    InvalidSymbol(i64),

    #[error("invalid binary symbol {0}, expected -1 or +1")]
    InvalidBinarySymbol(i64),

    #[error("column {column} is not a permutation of (-1, 0, 1)")]
    NotAPermutation { column: usize },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input")]
    EmptyInput,

    #[error("zero desired-harmonic power")]
    ZeroDesiredPower,

    #[error("unsupported LFSR degree {0}, expected 2..=16")]
    UnsupportedDegree(u32),

    #[error("LFSR seed state must be nonzero and fit in {degree} bits, got {seed:#x}")]
    InvalidSeedState { degree: u32, seed: u32 },

    #[error("DAC levels must satisfy a-1 < a0 < a1, got ({0}, {1}, {2})")]
    InvalidDacLevels(f64, f64, f64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("sequence does not have the RCS segment structure")]
    NotAssembled,

    #[error("unknown figure id {0:?}")]
    UnknownFigure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::LengthNotMultipleOfSix(_) => "length_not_multiple_of_six",
            Error::LengthNotCoprimeToSix(_) => "length_not_coprime_to_six",
            Error::InvalidSymbol(_) | Error::InvalidBinarySymbol(_) => "invalid_symbol",
            Error::NotAPermutation { .. } => "not_a_permutation",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::EmptyInput => "empty_input",
            Error::ZeroDesiredPower => "zero_desired_power",
            Error::UnsupportedDegree(_) => "unsupported_degree",
            Error::InvalidSeedState { .. } => "invalid_seed_state",
            Error::InvalidDacLevels(..) => "invalid_dac_levels",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::NotAssembled => "not_assembled",
            Error::UnknownFigure(_) => "unknown_figure",
            Error::Parse(_) => "parse_error",
            Error::Io(_) => "io_error",
            Error::Json(_) => "json_error",
        }
    }
}
