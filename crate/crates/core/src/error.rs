use thiserror::Error;

/// Failure classes of the reduction pipeline. Each maps to a CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("truncation plan infeasible: {reason}")]
    Planning {
        reason: String,
        /// Nearest orders that can be kept without splitting a cluster.
        feasible: Vec<usize>,
    },

    #[error("structure violated: {0}")]
    Structure(String),

    #[error("second-order assembly failed: {0}")]
    Assembly(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => 2,
            Error::Solver(_) => 3,
            Error::Planning { .. } => 4,
            Error::Structure(_) | Error::Assembly(_) => 5,
            Error::Io(_) => 6,
        }
    }

    /// Prefix the message with the pipeline stage, keeping the class.
    pub fn in_stage(self, stage: &str) -> Self {
        match self {
            Error::Validation(m) => Error::Validation(format!("{stage}: {m}")),
            Error::Solver(m) => Error::Solver(format!("{stage}: {m}")),
            Error::Planning { reason, feasible } => Error::Planning {
                reason: format!("{stage}: {reason}"),
                feasible,
            },
            Error::Structure(m) => Error::Structure(format!("{stage}: {m}")),
            Error::Assembly(m) => Error::Assembly(format!("{stage}: {m}")),
            Error::Io(m) => Error::Io(format!("{stage}: {m}")),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Solver(_) => "solver",
            Error::Planning { .. } => "planning",
            Error::Structure(_) => "structure",
            Error::Assembly(_) => "assembly",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
