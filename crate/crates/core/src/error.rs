use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("overflow in {func} at {detail}")]
    Overflow { func: &'static str, detail: String },

    #[error("{what} did not converge: {detail}")]
    NoConvergence { what: &'static str, detail: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("inadmissible potential: mu1 = {mu1} is not above -((N-2s)/2)^2 = {bound}")]
    Inadmissible { mu1: f64, bound: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no sign change of f on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("linear solver failed after {iterations} iterations, residual history {history:?}")]
    SolverFailure { iterations: usize, history: Vec<f64> },

    #[error("degenerate data: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain { func, detail: detail.into() }
}
