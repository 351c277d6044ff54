use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("site {0:?} lies outside the grid")]
    Boundary([i64; 3]),
    #[error("field value missing at collar site {0:?}")]
    MissingCollar([i64; 3]),
}
