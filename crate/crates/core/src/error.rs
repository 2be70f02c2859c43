use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("nonconforming mesh: {0}")]
    NonConforming(String),

    #[error("degenerate element {element}: signed measure {measure:e}")]
    DegenerateElement { element: usize, measure: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported polynomial order {0} (supported: 1..=3)")]
    UnsupportedOrder(usize),

    #[error("unsupported quadrature degree {0} (supported: 1..=8)")]
    UnsupportedDegree(usize),

    #[error("point {0:?} lies outside the reference element")]
    OutsideReference(Vec<f64>),

    #[error("stability violation: {0}")]
    StabilityViolation(String),

    #[error("system is not symmetrizable: asymmetry {0:e}")]
    NotSymmetrizable(f64),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("solution blew up at step {step} (t = {time}), |u|max = {value:e}; last good step {last_good}")]
    BlowUp {
        step: usize,
        last_good: usize,
        time: f64,
        value: f64,
    },

    #[error("problem has no exact solution")]
    MissingExact,
}

pub type Result<T> = std::result::Result<T, Error>;
