//! Library-wide error type.

use std::fmt;

/// Errors raised by configuration validation and the signal chain.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A derived grid quantity (M, N_CP, M_CP, eta*N, eta*M) is not a
    /// positive integer for the requested configuration.
    NonIntegerGrid(String),
    /// The subcarrier-spacing ratio is not a power of two.
    BadQ(usize),
    /// Band shares are outside (0, 1) or do not sum to one.
    BadShare(String),
    /// A buffer length does not match what the operation requires.
    LengthMismatch { expected: usize, got: usize },
    /// A transform size does not match the buffer it is applied to.
    SizeMismatch { expected: usize, got: usize },
    /// A symbol block was framed for the other CP mode, or its grids are
    /// inconsistent with the pair.
    FramingMismatch(String),
    /// Wide-numerology symbol index outside 0..Q.
    BadSymbolIndex { index: usize, count: usize },
    /// A subcarrier index is outside the active set it must belong to.
    IndexOutOfRange(String),
    /// A channel tap delay is not covered by the cyclic prefix.
    DelayExceedsCp { delay: usize, cp: usize },
    /// One-tap equalization hit a channel null.
    SpectralNull { bin: usize },
    /// Common-CP runs support only the identity channel; block equalizers
    /// for dispersive channels are out of scope.
    CommonCpRequiresIdentityChannel,
    /// Malformed configuration input (file, flag, or field value).
    BadConfig(String),
    /// Filesystem failure while writing artifacts.
    Io(String),
}

impl Error {
    /// Short machine-parsable token identifying the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonIntegerGrid(_) => "non_integer_grid",
            Error::BadQ(_) => "bad_q",
            Error::BadShare(_) => "bad_share",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::FramingMismatch(_) => "framing_mismatch",
            Error::BadSymbolIndex { .. } => "bad_symbol_index",
            Error::IndexOutOfRange(_) => "index_out_of_range",
            Error::DelayExceedsCp { .. } => "delay_exceeds_cp",
            Error::SpectralNull { .. } => "spectral_null",
            Error::CommonCpRequiresIdentityChannel => "common_cp_requires_identity_channel",
            Error::BadConfig(_) => "bad_config",
            Error::Io(_) => "io",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonIntegerGrid(what) => write!(f, "{what} must be a positive integer"),
            Error::BadQ(q) => write!(f, "q={q} is not a power of two"),
            Error::BadShare(what) => write!(f, "invalid band share: {what}"),
            Error::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} samples, got {got}")
            }
            Error::SizeMismatch { expected, got } => {
                write!(
                    f,
                    "transform size {expected} does not match buffer of {got}"
                )
            }
            Error::FramingMismatch(what) => write!(f, "framing mismatch: {what}"),
            Error::BadSymbolIndex { index, count } => {
                write!(f, "symbol index {index} outside 0..{count}")
            }
            Error::IndexOutOfRange(what) => write!(f, "index out of range: {what}"),
            Error::DelayExceedsCp { delay, cp } => {
                write!(
                    f,
                    "tap delay {delay} samples is not covered by cp of {cp} samples"
                )
            }
            Error::SpectralNull { bin } => {
                write!(
                    f,
                    "channel response at bin {bin} is below 1e-12; cannot equalize"
                )
            }
            Error::CommonCpRequiresIdentityChannel => {
                write!(f, "common cp mode requires an identity channel")
            }
            Error::BadConfig(what) => write!(f, "{what}"),
            Error::Io(what) => write!(f, "{what}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
