use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size {size} exceeds configured cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("halving {0} would pass the geometry depth")]
    DepthExceeded(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("duplicate rectangle {0}")]
    DuplicateRect(String),
    #[error("denominator is zero")]
    ZeroDenominator,
    #[error("rectangle {0} is not hooked")]
    NotHooked(String),
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
