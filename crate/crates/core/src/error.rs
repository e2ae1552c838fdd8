use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite sample at node {node} (x = {x})")]
    NonFinite { node: usize, x: f64 },

    #[error("time step {dt:e} exceeds the explicit stability budget {budget:e}; use a smaller dt or a coarser grid")]
    StabilityBudget { dt: f64, budget: f64 },

    #[error("blow-up detected at t = {t} (dt = {dt:e})")]
    BlowUp { t: f64, dt: f64 },

    #[error("singular system: pivot {pivot:e} at row {row}")]
    Singular { row: usize, pivot: f64 },

    #[error("{what} did not converge after {iters} iterations (last increment {residual:e})")]
    NonConvergence {
        what: &'static str,
        iters: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("division by zero norm: {0}")]
    ZeroNorm(&'static str),

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
