use std::fmt;

use nls_virial_core::Error;

/// Failure of one scenario, carrying its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Malformed or inconsistent input (exit 1).
    Validation(String),
    /// Solver or integrator breakdown (exit 2).
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    pub fn io(what: &str, e: impl fmt::Display) -> Self {
        Failure::Validation(format!("{what}: {e}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. }
            | Error::NonFinite(_)
            | Error::ResampleLoss(_)
            | Error::NegativeDenominator(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}
