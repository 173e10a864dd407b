//! Crate-wide error type with exit-code categories for the CLI.

use thiserror::Error;

/// A single schema violation found while validating a run configuration.
///
/// Validation collects every violation instead of stopping at the first,
/// so `field` carries the dotted path (e.g. `circuit.n`) for each one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid configuration:\n{}", format_violations(.0))]
    ConfigViolations(Vec<Violation>),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("instance too large: {0}")]
    Size(String),

    #[error("unsupported lattice: {0}")]
    UnsupportedLattice(String),

    #[error("aliasing: {0}")]
    Aliasing(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    /// CLI exit code category: config=2, numeric=3, size=4, io=5.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::ConfigViolations(_)
            | Error::UnsupportedLattice(_)
            | Error::Aliasing(_)
            | Error::Json(_) => 2,
            Error::Numeric(_) => 3,
            Error::Size(_) => 4,
            Error::Io(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
