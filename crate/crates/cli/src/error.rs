use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] ldpc_energy::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration errors, 3 for an infeasible
    /// constraint, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use ldpc_energy::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Infeasible(_)) => 3,
            CliError::Core(
                E::InvalidParameter(_) | E::InvalidProtograph(_) | E::Parse(_) | E::Unbracketed(_) | E::Lifting(_),
            ) => 2,
            _ => 1,
        }
    }
}
