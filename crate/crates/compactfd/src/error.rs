use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Model parameters violate their domain constraints.
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    /// Contract fields violate their domain constraints.
    #[error("invalid contract: {0}")]
    InvalidContract(String),

    /// Grid construction failed (odd N, too few intervals, ...).
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// An operation was called with arguments outside its contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Configuration input could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// The correcting-to-convergence inner iteration did not reach the
    /// requested tolerance within the iteration budget.
    #[error(
        "inner iteration did not converge at time step {step}: \
         residual {residual:.3e} after {iterations} iterations"
    )]
    NonConvergence {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    /// A non-finite value appeared in the solution vector.
    #[error("solution diverged at time step {step} (node {node} is non-finite)")]
    Divergence { step: usize, node: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for config/validation problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } | Error::Divergence { .. } => 3,
            _ => 2,
        }
    }
}
