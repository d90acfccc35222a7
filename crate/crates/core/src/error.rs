use thiserror::Error;

/// Errors raised by the solver, the baselines and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sensor parameters: {0}")]
    InvalidParams(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    /// A branch with a `Never` threshold makes the sampling process absorbing.
    #[error("threshold table has a Never entry at branch {branch}; the sensor is eventually never sampled")]
    AbsorbingBranch { branch: usize },

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error("no sensor is active at eta = {eta}; the relaxed policy samples nothing")]
    Infeasible { eta: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::InvalidParams(_) => 2,
            Error::Io(_) | Error::Csv(_) => 1,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
