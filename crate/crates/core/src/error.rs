use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("observation {value} of series {series} lies outside the grid")]
    OutsideGrid { series: String, value: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {min} observations, got {got}")]
    TooShort { min: usize, got: usize },

    #[error("densities were built on different grids")]
    GridMismatch,

    #[error("series index {index} out of range for {len} series")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("series {0} has zero variance")]
    ZeroVariance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the failure came from the filesystem rather than from the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            Error::Json(e) => e.is_io(),
            _ => false,
        }
    }
}
