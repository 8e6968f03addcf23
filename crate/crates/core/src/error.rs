use thiserror::Error;

/// Errors raised by setup, solve and I/O.
#[derive(Debug, Error)]
pub enum AmgError {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Size {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("row {row} has {count} nonzeros, exceeding ELL width {width}")]
    Capacity { row: usize, count: usize, width: usize },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("definiteness error: {0}")]
    Definiteness(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("smoother hit a zero diagonal on active row {row}")]
    SingularSmoother { row: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("report error: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, AmgError>;

impl AmgError {
    /// Process exit code used by the command-line driver.
    ///
    /// Code 2 is left to clap for usage errors and 3 marks a run that did
    /// not reach the requested tolerance.
    pub fn exit_code(&self) -> i32 {
        match self {
            AmgError::Argument(_) | AmgError::Size { .. } => 1,
            AmgError::Structure(_) | AmgError::Capacity { .. } => 4,
            AmgError::Definiteness(_) | AmgError::SingularSmoother { .. } => 5,
            AmgError::Geometry(_) => 6,
            AmgError::Parse { .. } => 7,
            AmgError::Io(_) | AmgError::Report(_) => 8,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        AmgError::Parse {
            line,
            msg: msg.into(),
        }
    }
}

/// Exit code for a run that finished without meeting its tolerance.
pub const EXIT_NOT_CONVERGED: i32 = 3;
