//! Error type shared by all toolkit modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A^dag| entry = {deviation:.3e} (tol {tol:.1e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },

    #[error("{what} is singular and cannot be inverted")]
    Singular { what: String },

    #[error("parameter {param} out of range: {value}")]
    InvalidRange { param: &'static str, value: f64 },

    #[error("total dimension {dim} exceeds the configured ceiling {ceiling}")]
    DimensionCeiling { dim: usize, ceiling: usize },

    #[error("weights have imaginary residue {residue:.3e} above 1e-9; numerical health check failed")]
    ImaginaryResidue { residue: f64 },

    #[error("purity estimate is nonpositive ({value:.6e}); statistical fluctuation near zero")]
    NonpositivePurity { value: f64 },

    #[error("unstable ratio: denominator estimate {denominator:.6e} below floor {floor:.1e}")]
    UnstableRatio { denominator: f64, floor: f64 },

    #[error("snapshot batch configuration invalid: {reason}")]
    BadBatches { reason: String },

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
