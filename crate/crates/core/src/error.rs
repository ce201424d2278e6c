use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every evaluator in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole at s = {}{:+}i", .0.re, .0.im)]
    PoleAt(Complex64),
    #[error("argument out of domain: {0}")]
    OutOfDomain(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("imaginary residue {residue:e} exceeds {limit:e}")]
    SymmetryViolation { residue: f64, limit: f64 },
    #[error("S_beta table holds {available} terms but {required} are needed")]
    TableTooShort { required: usize, available: usize },
}

impl Error {
    /// Stable machine-readable name, used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::PoleAt(_) => "PoleAt",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::NonConvergence(_) => "NonConvergence",
            Error::InvalidInput(_) => "InvalidInput",
            Error::SymmetryViolation { .. } => "SymmetryViolation",
            Error::TableTooShort { .. } => "TableTooShort",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
