use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed caller input (lengths, labels, ranges).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("posterior has no interior mode: {0}")]
    NoInteriorMode(String),

    #[error("posterior mode lies on the boundary: {0}")]
    BoundaryMode(String),

    #[error("optimizer did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    Convergence {
        iterations: usize,
        gradient_norm: f64,
    },

    /// An iterative bound did not close its gap; `best_bound` is still a valid upper bound.
    #[error("bound did not converge: best bound {best_bound}, gap {gap:e}")]
    BoundStall { best_bound: f64, gap: f64 },

    #[error("credible level alpha = 0 gives an unbounded region")]
    DegenerateLevel,

    #[error("value {0} is not attainable by the diagonal section")]
    Unattainable(f64),

    #[error("matrix decomposition failed: {0}")]
    Decomposition(String),

    #[error("linear program solver failure: {0}")]
    Solver(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("credible region does not intersect the probability simplex")]
    InfeasibleRegion,

    #[error("uncertainty set is empty: {0}")]
    EmptySet(String),

    #[error("dependence hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("queue is unstable: mean interarrival {interarrival} <= mean service {service}")]
    Instability { service: f64, interarrival: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Data files that parse but violate their schema (ragged rows, NaN cells, ...).
    #[error("data error: {0}")]
    Data(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

impl Error {
    /// Process exit code: 2 for configuration problems, 3 for input data,
    /// 4 for everything raised while computing.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } | Error::Data(_) => 3,
            _ => 4,
        }
    }
}
