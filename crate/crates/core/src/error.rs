//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible.
    #[error("dimension mismatch: {0}")]
    Dim(String),

    /// Exact complex division by zero.
    #[error("division by zero")]
    DivByZero,

    /// A pivot fell below the scale- and precision-aware tolerance.
    #[error("matrix is singular to working precision")]
    SingularMatrix,

    /// The context does not carry enough mantissa bits for the requested run.
    #[error("precision too low: {required} bits required, context provides {available}")]
    PrecisionTooLow { required: u32, available: u32 },

    /// The eigendecomposition backend could not reach the requested residual
    /// after its re-randomization budget.
    #[error("eigendecomposition failed: requested residual {requested:.3e}, best achieved {achieved:.3e}")]
    EigFailure { requested: f64, achieved: f64 },

    /// Eigenvalue gap below threshold; the draw cannot separate the factors.
    #[error("repeated eigenvalues: gap {gap:.3e} below threshold {threshold:.3e}")]
    RepeatedEigenvalues { gap: f64, threshold: f64 },

    /// The recovered factors do not reproduce the input tensor.
    #[error("input does not admit a complete decomposition (relative residual {residual:.3e})")]
    NotDiagonalisable { residual: f64 },

    /// A slice combination vanished on a factor; the eigenvalue ratio is undefined.
    #[error("zero denominator in eigenvalue ratio for factor {index}")]
    ZeroDenominator { index: usize },

    /// Requested instance parameters cannot be met.
    #[error("infeasible request: {0}")]
    Infeasible(String),

    /// Parameter schedule rejected at construction.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A loaded tensor violates the symmetry tolerance.
    #[error("asymmetric tensor: {0}")]
    AsymmetricTensor(String),

    /// A tensor file failed validation.
    #[error("malformed tensor file: {0}")]
    MalformedFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
