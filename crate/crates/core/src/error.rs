use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("curve is not strictly convex: curvature {curvature:e} at raw parameter {parameter}")]
    NotConvex { parameter: f64, curvature: f64 },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("non-finite kernel value at row {row}, column {col}")]
    Assembly { row: usize, col: usize },
    #[error("linear solver failure: {0}")]
    Solver(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("diagnostic failed: {0}")]
    Diagnostic(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
