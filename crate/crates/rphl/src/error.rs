use thiserror::Error;

/// Failures of a harness run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("total dimension {dim} exceeds the guard {limit}")]
    Guard { dim: usize, limit: usize },
    #[error("refused: {reason}")]
    Refusal {
        reason: String,
        momentum: Vec<i64>,
        value: f64,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(rphl_core::Error),
}

impl From<rphl_core::Error> for HarnessError {
    fn from(e: rphl_core::Error) -> Self {
        match e {
            rphl_core::Error::DimensionExceeded { dim, limit } => HarnessError::Guard { dim, limit },
            rphl_core::Error::NegativeCoupling { min, at } => HarnessError::Refusal {
                reason: format!(
                    "condition (A.2) fails: lattice Fourier transform of U is {min:e} at momentum label {at:?}"
                ),
                momentum: at.to_vec(),
                value: min,
            },
            other => HarnessError::Core(other),
        }
    }
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Refusal { .. } => 3,
            HarnessError::Guard { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
