use thiserror::Error;

/// Errors raised by model construction, evaluation, fitting and solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("value out of range at index {index}: {message}")]
    Range { index: usize, message: String },

    #[error("capacity exceeded: {required} exceeds budget {budget}")]
    Capacity { required: u128, budget: u128 },

    #[error("training diverged in restart {restart}: non-finite loss")]
    Diverged { restart: usize },

    #[error("non-finite objective at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("solver stopped after {iterations} iterations with stationarity {stationarity:e}")]
    NotConverged {
        iterations: usize,
        stationarity: f64,
    },

    #[error("schema violation{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Schema { row: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            Error::Schema { .. } | Error::Json(_) => 4,
            Error::Dimension { .. }
            | Error::Input(_)
            | Error::Domain(_)
            | Error::Range { .. }
            | Error::Capacity { .. } => 5,
            Error::NotConverged { .. } => 6,
            Error::Diverged { .. } | Error::NonFinite { .. } => 7,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::Input(_) => "input",
            Error::Domain(_) => "domain",
            Error::Range { .. } => "range",
            Error::Capacity { .. } => "capacity",
            Error::Diverged { .. } => "diverged",
            Error::NonFinite { .. } => "non_finite",
            Error::NotConverged { .. } => "not_converged",
            Error::Schema { .. } => "schema",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::Dimension { expected, got })
        }
    }
}
