use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Numerics(#[from] zml_core::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 3 for undecided numerics, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use zml_core::error::QuadratureError;
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerics(e) => match e {
                zml_core::Error::Inconclusive(_) => 3,
                zml_core::Error::Quadrature(QuadratureError::NonConvergent { .. }) => 3,
                _ => 2,
            },
            _ => 1,
        }
    }
}
