use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice dimensions {lx}x{ly}")]
    InvalidDimensions { lx: usize, ly: usize },

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("gauge entries must be +1 or -1 (bond {bond} has {value})")]
    InvalidGauge { bond: usize, value: i8 },

    #[error("matrix dimension {0} is odd")]
    OddDimension(usize),

    #[error("matrix is not antisymmetric at ({row}, {col})")]
    NotAntisymmetric { row: usize, col: usize },

    #[error("brute-force Pfaffian limited to n <= {max}, got {n}")]
    BruteForceTooLarge { n: usize, max: usize },

    #[error("enumeration infeasible: {what} ({size} exceeds cap {cap})")]
    Infeasible {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("error rate {0} out of range")]
    RateOutOfRange(f64),

    #[error("unsupported Renyi index {0} (expected 2 or 3)")]
    UnsupportedRenyiIndex(u32),

    #[error("all four sector Pfaffians vanish")]
    DegenerateSectors,

    #[error("{clamped} of {total} samples clamped, exceeding the 0.1% budget")]
    ClampBudgetExceeded { clamped: usize, total: usize },

    #[error("no sign change of the {quantity} difference on [{lo}, {hi}]")]
    NoBracket { quantity: String, lo: f64, hi: f64 },

    #[error("threshold undefined: {0}")]
    ThresholdUndefined(String),

    #[error("invalid stabilizer code: {0}")]
    InvalidCode(String),

    #[error("channel weights sum to {0}, expected 1")]
    UnnormalizedChannel(f64),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
