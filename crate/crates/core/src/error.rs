use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spline spec: {0}")]
    InvalidSpec(String),

    #[error("derivative order {order} exceeds the smoothness budget of an order-{m} spline")]
    DerivativeOrder { order: usize, m: usize },

    #[error("invalid point configuration: {0}")]
    InvalidPoints(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "collocation system is singular: point {index} (x = {x}) lies outside its admissible interval"
    )]
    Singular { index: usize, x: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("missing samples for {} (point, derivative) pairs, first at x = {}, s = {}", .0.len(), .0[0].0, .0[0].1)]
    MissingSamples(Vec<(f64, usize)>),

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed or inconsistent input data.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Invariant(_) | Error::InvalidArgument(_))
    }
}
