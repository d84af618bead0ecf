//! Dense complex matrices and the Hermitian subtype.
//!
//! [`ComplexMatrix`] is a thin validated wrapper around a dense
//! `nalgebra` matrix of `Complex<f64>`: construction rejects non-finite
//! entries, everything else delegates. [`HermitianMatrix`] additionally
//! certifies Hermitian symmetry up to a tolerance at construction time.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// Dense complex matrix storage used throughout the crate.
pub type CMat = DMatrix<Complex<f64>>;

/// Complex scalar alias.
pub type C64 = Complex<f64>;

/// A dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: CMat,
}

impl ComplexMatrix {
    /// Build from row-major entries.
    pub fn new(rows: usize, cols: usize, row_major: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EntryCountMismatch {
                rows,
                cols,
                expected: rows * cols,
                got: row_major.len(),
            });
        }
        if row_major.len() != rows * cols {
            return Err(Error::EntryCountMismatch {
                rows,
                cols,
                expected: rows * cols,
                got: row_major.len(),
            });
        }
        let inner = CMat::from_fn(rows, cols, |i, j| row_major[i * cols + j]);
        Self::from_dmatrix(inner)
    }

    /// Build from row-major real entries.
    pub fn from_real(rows: usize, cols: usize, row_major: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            row_major.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    /// Wrap an existing dense matrix, rejecting non-finite entries.
    pub fn from_dmatrix(inner: CMat) -> Result<Self> {
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                let z = inner[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j });
                }
            }
        }
        Ok(ComplexMatrix { inner })
    }

    /// Wrap without the finiteness scan. Internal use only, for results of
    /// arithmetic on already-validated inputs.
    pub(crate) fn wrap(inner: CMat) -> Self {
        debug_assert!(inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        ComplexMatrix { inner }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            inner: CMat::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix {
            inner: CMat::identity(n, n),
        }
    }

    /// Square diagonal matrix from real entries.
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        ComplexMatrix {
            inner: CMat::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(diag[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    /// Borrow the underlying dense matrix.
    pub fn matrix(&self) -> &CMat {
        &self.inner
    }

    pub fn into_matrix(self) -> CMat {
        self.inner
    }

    /// Largest entry magnitude (max norm).
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Embed into the top-left corner of an `n x n` zero matrix, where
    /// `n = max(rows, cols)`. Rectangular inputs to square-only
    /// operations go through this.
    pub fn zero_padded_square(&self) -> ComplexMatrix {
        let n = self.rows().max(self.cols());
        let mut out = CMat::zeros(n, n);
        out.view_mut((0, 0), (self.rows(), self.cols()))
            .copy_from(&self.inner);
        ComplexMatrix { inner: out }
    }
}

/// A square complex matrix certified Hermitian within a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

impl HermitianMatrix {
    /// Validate and wrap. The deviation check is relative:
    /// `max |M[i,j] - conj(M[j,i])| <= hermitian_tol * (1 + max |M|)`.
    /// On failure the error names the worst offending entry pair.
    pub fn new(m: ComplexMatrix, hermitian_tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let scale = 1.0 + m.max_abs();
        let mut worst = 0.0;
        let mut worst_at = (0, 0);
        let a = m.matrix();
        for i in 0..m.rows() {
            for j in i..m.cols() {
                let dev = (a[(i, j)] - a[(j, i)].conj()).norm();
                if dev > worst {
                    worst = dev;
                    worst_at = (i, j);
                }
            }
        }
        if worst > hermitian_tol * scale {
            return Err(Error::NotHermitian {
                row: worst_at.0,
                col: worst_at.1,
                deviation: worst,
                tol: hermitian_tol * scale,
            });
        }
        Ok(HermitianMatrix { inner: m })
    }

    /// Build from row-major entries with the given tolerance.
    pub fn from_entries(n: usize, row_major: Vec<C64>, hermitian_tol: f64) -> Result<Self> {
        Self::new(ComplexMatrix::new(n, n, row_major)?, hermitian_tol)
    }

    /// Build from row-major real entries (symmetric check applies).
    pub fn from_real(n: usize, row_major: &[f64], hermitian_tol: f64) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(n, n, row_major)?, hermitian_tol)
    }

    /// Replace a matrix by its Hermitian part `(M + M*) / 2`.
    ///
    /// The averaged matrix is exactly Hermitian entrywise, so this is the
    /// canonical way to wrap computed quantities that are Hermitian in
    /// exact arithmetic but carry floating-point asymmetry.
    pub fn symmetrize(m: &CMat) -> Self {
        let n = m.nrows();
        debug_assert_eq!(n, m.ncols());
        let half = C64::new(0.5, 0.0);
        let sym = CMat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * half);
        HermitianMatrix {
            inner: ComplexMatrix::wrap(sym),
        }
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            inner: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix {
            inner: ComplexMatrix::identity(n),
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        HermitianMatrix {
            inner: ComplexMatrix::diagonal(diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn matrix(&self) -> &CMat {
        self.inner.matrix()
    }

    pub fn as_complex(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_complex(self) -> ComplexMatrix {
        self.inner
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner.get(row, col)
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    /// Entrywise sum, exact Hermitian by construction.
    pub fn add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch {
                expected_rows: self.dim(),
                expected_cols: self.dim(),
                rows: other.dim(),
                cols: other.dim(),
            });
        }
        Ok(HermitianMatrix {
            inner: ComplexMatrix::wrap(self.matrix() + other.matrix()),
        })
    }
}

/// Entrywise (Hadamard) product. Shapes must match.
pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::ShapeMismatch {
            expected_rows: a.rows(),
            expected_cols: a.cols(),
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    Ok(ComplexMatrix::wrap(a.matrix().component_mul(b.matrix())))
}

/// Frobenius norm (root of the sum of squared entry magnitudes).
pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.matrix().norm()
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    spectral_norm_raw(m.matrix())
}

pub(crate) fn frobenius_norm_raw(m: &CMat) -> f64 {
    m.norm()
}

pub(crate) fn spectral_norm_raw(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}
