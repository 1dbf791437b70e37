use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural precondition on the input did not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The requested size exceeds a configured cap.
    #[error("resource cap exceeded: {what} = {requested} > {cap}")]
    CapExceeded {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("root finder did not converge: {0}")]
    Convergence(String),

    /// Conditioned sampling was aborted because the pilot acceptance rate was too low.
    #[error(
        "acceptance too low: {accepted}/{drawn} pilot draws satisfied TREE \
         (rate {rate:.3e} < {min_rate:.1e}); try a larger tilt c = pk"
    )]
    AcceptanceTooLow {
        accepted: u64,
        drawn: u64,
        rate: f64,
        min_rate: f64,
    },

    #[error("retry budget of {budget} trials exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Precondition(_) | Error::NoSolution(_) => 2,
            Error::CapExceeded { .. } => 3,
            Error::AcceptanceTooLow { .. } | Error::BudgetExhausted { .. } => 4,
            Error::Convergence(_) => 4,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        }
    }
}
