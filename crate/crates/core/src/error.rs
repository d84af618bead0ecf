use thiserror::Error;

/// Errors raised by the perturbation kernels.
///
/// Variants split into two classes: *precondition* failures (the input
/// violates a documented contract) and *numerical* failures (a backend
/// factorization did not converge or produced non-finite values).
/// [`Error::is_numerical`] distinguishes them so front ends can map the
/// classes to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: worst entry pair ({row},{col})/({col},{row}) deviates by {deviation:.3e} (tolerance {tol:.3e})")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
        tol: f64,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("entry ({row},{col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    EntryCountMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not positive semi-definite: eigenvalue {min_eigenvalue:.6e} below -{tol:.3e}")]
    NotPsd { min_eigenvalue: f64, tol: f64 },

    #[error("block is not positive definite (min eigenvalue {min_eigenvalue:.6e}, required > {required:.3e}); the perturbation is too large for the split")]
    NotPositiveDefinite { min_eigenvalue: f64, required: f64 },

    #[error("matrix has a numerically zero eigenvalue (rank {rank} < dimension {dim}); use the singular-case power approximation instead")]
    KernelPresent { rank: usize, dim: usize },

    #[error("function value is not finite at eigenvalue {eigenvalue:.6e}")]
    FunctionValueNotFinite { eigenvalue: f64 },

    #[error("derivative is not finite at eigenvalue {eigenvalue:.6e}")]
    DerivativeNotFinite { eigenvalue: f64 },

    #[error("divided difference of the square root is infinite for a zero eigenvalue pair; use the power-one divided difference instead")]
    SqrtDividedDifferenceAtZero,

    #[error("invalid exponent {value}: {requirement}")]
    InvalidExponent { value: f64, requirement: &'static str },

    #[error("entry {index} is {value:.6e}, but all entries must be strictly positive")]
    NonPositiveEntry { index: usize, value: f64 },

    #[error("matrix is numerically singular: smallest singular value {min_sigma:.6e} below threshold {threshold:.3e}")]
    Singular { min_sigma: f64, threshold: f64 },

    #[error("spectral separation violated: gap between clusters is {gap:.6e}, required at least {required:.3e}")]
    SeparationViolated { gap: f64, required: f64 },

    #[error("eigenvalues are not sorted in descending order at position {index}")]
    NotDescending { index: usize },

    #[error("block size {l} exceeds dimension {n}")]
    BlockSizeTooLarge { l: usize, n: usize },

    #[error("invalid instance specification: {0}")]
    InvalidInstanceSpec(String),

    #[error("invalid scale ladder: {0}")]
    InvalidScales(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of the numerical backend (as opposed to
    /// violated input contracts).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
