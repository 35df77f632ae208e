use thiserror::Error;

/// Errors produced by the modeling library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the range where the model is defined.
    #[error("{quantity} = {value} violates {bound}")]
    Domain {
        quantity: &'static str,
        value: f64,
        bound: String,
    },

    /// An iterative method failed to reach its tolerance.
    #[error("{method} did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Root bracketing collapsed without meeting the tolerance.
    #[error("solver stagnated in [{lo}, {hi}] with residuals ({f_lo:e}, {f_hi:e})")]
    Stagnation { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// A least-squares fit stopped before converging; carries the best parameters seen.
    #[error("fit did not converge after {iterations} iterations (rss {rss:e}, parameters {params:?})")]
    FitNoConvergence {
        iterations: usize,
        rss: f64,
        params: Vec<f64>,
    },

    /// A requested target cannot be reached by the available control range.
    #[error("target {requested:e} outside reachable range; achievable magnitude is {achievable:e}")]
    OutOfRange { requested: f64, achievable: f64 },

    /// No solution exists for the requested search.
    #[error("not found: {0}")]
    NotFound(String),

    /// An asset or configuration file could not be interpreted.
    #[error("invalid asset: {0}")]
    Asset(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(quantity: &'static str, value: f64, bound: impl Into<String>) -> Error {
    Error::Domain {
        quantity,
        value,
        bound: bound.into(),
    }
}
