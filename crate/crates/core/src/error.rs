use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("operator is not Hermitian (max |M - M^dag| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("{sum} deviates from the domain projector by {deviation:.3e} (Frobenius)")]
    NotTracePreserving { sum: &'static str, deviation: f64 },

    #[error("embedding is not an isometry: ||V^dag V - I||_F = {deviation:.3e}")]
    NotIsometry { deviation: f64 },

    #[error("invalid density matrix: {reason}")]
    InvalidState { reason: String },

    #[error("{what} is numerically zero")]
    DegenerateSupport { what: &'static str },

    #[error("value {value} outside domain of {function}: {reason}")]
    Domain {
        function: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("precondition violated for {operation}: {reason}")]
    Precondition {
        operation: &'static str,
        reason: String,
    },

    #[error("unknown {kind} '{name}' (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("invalid parameter {name} = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("schema violation: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dims(r: usize, c: usize) -> String {
    format!("{r}x{c}")
}
