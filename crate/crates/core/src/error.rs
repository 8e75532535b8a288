use thiserror::Error;

/// Errors raised by geometry evaluation, integration and auditing.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("point ({u}, {v}) lies outside the open domain of chart `{chart}`")]
    Domain { chart: String, u: f64, v: f64 },

    #[error("degenerate metric: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numerical domain error: {0}")]
    Numerical(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;
