use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("ellipticity lost at x = {point:?}: dominance margin {margin:e}")]
    Ellipticity { point: Vec<f64>, margin: f64 },

    #[error("linear solver stagnated after {iterations} iterations (relative residual {residual:e})")]
    Solver {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("epsilon tuning failed: {0}")]
    Tuning(String),

    #[error("inconsistent result: {0}")]
    Inconsistent(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
