use thiserror::Error;

/// Errors produced by the analysis, design and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// `J^-1` was asked to invert perfect information.
    #[error("mutual information 1 has no finite preimage under J")]
    Saturated,

    /// A degree distribution or protograph failed validation.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The base size or shape is not supported by the construction.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A rate that cannot be reached with the designed puncturing pattern.
    #[error("rate {requested} is not achievable; achievable rates: {achievable}")]
    UnachievableRate { requested: String, achievable: String },

    /// An iterative solver hit its sweep cap.
    #[error("no convergence after {iterations} sweeps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// The linear program has no feasible point (closed tunnel).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A design sweep ran out of budget.
    #[error("design failed: {0}")]
    DesignFailed(String),

    /// A lifting or encoding step could not be completed.
    #[error("construction failed: {0}")]
    Construction(String),

    /// Malformed text input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
