use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Field degree outside the supported range, or a polynomial of the wrong degree.
    FieldDegree { m: u32, poly: u32 },
    /// The polynomial does not generate the full multiplicative group.
    NotPrimitive { m: u32, poly: u32, order: u32 },
    /// A symbol value that does not fit in the field.
    InvalidSymbol { value: u32, m: u32 },
    /// Inverse of zero requested.
    ZeroInverse,
    /// Code parameters that cannot describe a regular code.
    CodeParams(String),
    /// Parity-check construction gave up after bounded retries.
    Construction(String),
    /// Gaussian elimination found fewer than `rows` independent rows.
    RankDeficient { rank: usize, rows: usize },
    /// A vector or slice had the wrong length.
    Length { expected: usize, found: usize },
    /// Matrix/vector shapes that do not agree.
    Dimension(String),
    /// A probability vector that is negative, non-finite or does not sum to one.
    ProbVector(String),
    /// Antenna/codeword bookkeeping that does not divide evenly.
    Mapping(String),
    /// NaN or infinite input, or a factorization that failed on it.
    NonFinite(&'static str),
    /// The SNR search range does not bracket the requested rate.
    NoBracket { target: f64, lo_db: f64, hi_db: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::FieldDegree { m, poly } => {
                write!(f, "polynomial {poly:#x} is not a degree-{m} polynomial (2 <= m <= 16)")
            }
            Error::NotPrimitive { m, poly, order } => write!(
                f,
                "polynomial {poly:#x} is not primitive for m = {m}: alpha has order {order}, expected {}",
                (1u32 << m) - 1
            ),
            Error::InvalidSymbol { value, m } => {
                write!(f, "symbol {value} does not belong to GF(2^{m})")
            }
            Error::ZeroInverse => write!(f, "zero has no multiplicative inverse"),
            Error::CodeParams(msg) => write!(f, "invalid code parameters: {msg}"),
            Error::Construction(msg) => write!(f, "code construction failed: {msg}"),
            Error::RankDeficient { rank, rows } => write!(
                f,
                "parity-check matrix has rank {rank} < {rows}; reconstruct with a new seed"
            ),
            Error::Length { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::ProbVector(msg) => write!(f, "invalid probability vector: {msg}"),
            Error::Mapping(msg) => write!(f, "invalid mapping plan: {msg}"),
            Error::NonFinite(what) => write!(f, "non-finite input: {what}"),
            Error::NoBracket { target, lo_db, hi_db } => write!(
                f,
                "rate {target} bps/Hz is not bracketed by [{lo_db}, {hi_db}] dB"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
