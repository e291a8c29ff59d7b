use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("floating-point overflow at partial sum index {index}")]
    Overflow { index: usize },
    #[error("{0}! is not representable as a 64-bit float (limit 170!)")]
    FactorialOverflow(u64),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error("mode {mode} out of range 1..={modes}")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("permanent of a {size}x{size} matrix refused: cap is {cap} (cost grows as 2^n * n)")]
    PermanentCap { size: usize, cap: usize },

    #[error("enumeration needs {required} terms, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("configuration has {got} photons, expected {expected}")]
    PhotonCount { got: usize, expected: usize },

    #[error("layer count must be at least 1")]
    NoLayers,

    #[error("record {shot}: {got} detector bits, expected {expected}")]
    WidthMismatch { shot: u64, got: usize, expected: usize },

    #[error("no click records")]
    NoShots,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
