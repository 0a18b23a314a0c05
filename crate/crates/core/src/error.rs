use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian: defect {defect:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("operator is not positive semidefinite: minimal eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid comb signature: {0}")]
    Signature(String),

    #[error("normalization violated: residual {residual:.3e} exceeds {tolerance:.3e}")]
    Normalization { residual: f64, tolerance: f64 },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("object is extremal; no decomposition exists")]
    Extremal,

    #[error("combination 5 (non-extremal instrument with extremal channel and extremal POVM) is an open problem")]
    OpenProblem,
}
