use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid factor layout: {0}")]
    InvalidFactors(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("time {t} outside [0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },

    #[error("invalid pulse schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid pulse shape: {0}")]
    InvalidShape(String),

    #[error("invalid step policy: {0}")]
    InvalidStepPolicy(String),

    #[error("control {control} is incompatible with system dimensions {dims:?}")]
    IncompatibleControl { control: String, dims: Vec<usize> },

    #[error("power-law fit needs at least 3 usable points, found {usable}")]
    InsufficientFitPoints { usable: usize },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("empty series")]
    EmptySeries,
}

pub type Result<T> = std::result::Result<T, Error>;
