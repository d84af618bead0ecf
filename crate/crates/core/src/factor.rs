//! Exact factorizations: Hermitian eigendecomposition, singular value
//! decomposition, and the functional calculus built on top of them.
//!
//! These routines are the oracle side of the crate: approximation errors
//! are always measured against values computed here.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::matrix::{CMat, ComplexMatrix, HermitianMatrix, C64};
use crate::tol::Tolerances;

/// Eigendecomposition `A = U diag(alpha) U*` of a Hermitian matrix,
/// with eigenvalues sorted in descending order so that any kernel
/// occupies the trailing positions.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    u: CMat,
    alpha: Vec<f64>,
}

impl SpectralDecomposition {
    /// Assemble from parts, validating unitarity and the descending order.
    pub fn new(u: ComplexMatrix, alpha: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare {
                rows: u.rows(),
                cols: u.cols(),
            });
        }
        if u.rows() != alpha.len() {
            return Err(Error::ShapeMismatch {
                expected_rows: alpha.len(),
                expected_cols: alpha.len(),
                rows: u.rows(),
                cols: u.cols(),
            });
        }
        for (i, w) in alpha.windows(2).enumerate() {
            if w[0] < w[1] {
                return Err(Error::NotDescending { index: i + 1 });
            }
        }
        let n = u.rows();
        let resid = (u.matrix() * u.matrix().adjoint() - CMat::identity(n, n)).norm();
        if resid > tol.unitary_tol * (n as f64) {
            return Err(Error::Numerical(format!(
                "eigenvector matrix is not unitary (residual {resid:.3e})"
            )));
        }
        Ok(SpectralDecomposition {
            u: u.into_matrix(),
            alpha,
        })
    }

    pub(crate) fn from_parts(u: CMat, alpha: Vec<f64>) -> Self {
        SpectralDecomposition { u, alpha }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Eigenvector matrix, columns in eigenvalue order.
    pub fn unitary(&self) -> &CMat {
        &self.u
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.alpha
    }

    /// `U M U*` — push a matrix expressed in the eigenbasis back to the
    /// original basis.
    pub fn conjugate(&self, m: &CMat) -> CMat {
        &self.u * m * self.u.adjoint()
    }

    /// `U* M U` — express a matrix in the eigenbasis.
    pub fn rotate_into(&self, m: &CMat) -> CMat {
        self.u.adjoint() * m * &self.u
    }

    /// `U diag(alpha) U*`.
    pub fn reconstruct(&self) -> HermitianMatrix {
        self.conjugate_diagonal(&self.alpha)
    }

    /// `U diag(values) U*` for an arbitrary real diagonal.
    pub fn conjugate_diagonal(&self, values: &[f64]) -> HermitianMatrix {
        debug_assert_eq!(values.len(), self.dim());
        let d = CMat::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        HermitianMatrix::symmetrize(&self.conjugate(&d))
    }

    /// Functional calculus: `f(A) = U diag(f(alpha)) U*`.
    ///
    /// Fails if `f` is non-finite at any eigenvalue, reporting the
    /// offending eigenvalue.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> Result<HermitianMatrix> {
        let mut values = Vec::with_capacity(self.dim());
        for &a in &self.alpha {
            let v = f(a);
            if !v.is_finite() {
                return Err(Error::FunctionValueNotFinite { eigenvalue: a });
            }
            values.push(v);
        }
        Ok(self.conjugate_diagonal(&values))
    }
}

/// Singular value decomposition `X = U diag(sigma) V*` of a square
/// matrix, singular values descending.
#[derive(Debug, Clone)]
pub struct SvdDecomposition {
    u: CMat,
    sigma: Vec<f64>,
    v: CMat,
}

impl SvdDecomposition {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn left(&self) -> &CMat {
        &self.u
    }

    /// Singular values, descending and nonnegative.
    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn right(&self) -> &CMat {
        &self.v
    }

    /// `U diag(sigma) V*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = CMat::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                C64::new(self.sigma[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        ComplexMatrix::wrap(&self.u * d * self.v.adjoint())
    }
}

/// Hermitian eigendecomposition with descending eigenvalues.
///
/// The input is symmetrized exactly before factorization, so the
/// certified Hermitian deviation of the input never leaks into the
/// eigenvectors. The reconstruction residual is verified against
/// `recon_tol`.
pub fn eigh(a: &HermitianMatrix, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let sym = HermitianMatrix::symmetrize(a.matrix());
    let se = nalgebra::SymmetricEigen::try_new(sym.matrix().clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("eigendecomposition did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .expect("finite eigenvalues")
    });
    let alpha: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut u = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        u.column_mut(dst).copy_from(&se.eigenvectors.column(src));
    }

    let dec = SpectralDecomposition::from_parts(u, alpha);
    let scale = 1.0 + a.max_abs();
    let resid = (dec.reconstruct().matrix() - a.matrix()).norm();
    if resid > tol.recon_tol * scale * (n as f64) {
        return Err(Error::Numerical(format!(
            "eigendecomposition residual {resid:.3e} exceeds tolerance"
        )));
    }
    Ok(dec)
}

/// Singular value decomposition of a square matrix.
///
/// Rectangular inputs must be zero-padded to square by the caller
/// (see [`ComplexMatrix::zero_padded_square`]). The direct bidiagonal
/// solver occasionally returns wrong factors for rank-deficient complex
/// input, so its result is validated and a Gram-matrix route through
/// the Hermitian eigensolver serves as the fallback.
pub fn svd(x: &ComplexMatrix) -> Result<SvdDecomposition> {
    if !x.is_square() {
        return Err(Error::NotSquare {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    let n = x.rows();
    let bound = 1e-10 * (1.0 + x.max_abs()) * (n as f64);

    if let Some(dec) = svd_direct(x) {
        if svd_residual(&dec, x) <= bound {
            return Ok(dec);
        }
    }
    let dec = svd_via_gram(x)?;
    let resid = svd_residual(&dec, x);
    if resid > bound {
        return Err(Error::Numerical(format!(
            "singular value decomposition residual {resid:.3e} exceeds tolerance"
        )));
    }
    Ok(dec)
}

fn svd_residual(dec: &SvdDecomposition, x: &ComplexMatrix) -> f64 {
    let recon = (dec.reconstruct().matrix() - x.matrix()).norm();
    let ortho_u = (dec.u.adjoint() * &dec.u - identity(dec.dim())).norm();
    let ortho_v = (dec.v.adjoint() * &dec.v - identity(dec.dim())).norm();
    recon.max((1.0 + x.max_abs()) * ortho_u.max(ortho_v))
}

fn svd_direct(x: &ComplexMatrix) -> Option<SvdDecomposition> {
    let n = x.rows();
    // convergence threshold matches nalgebra's own default for `SVD::new`
    let f = nalgebra::SVD::try_new(x.matrix().clone(), true, true, f64::EPSILON * 5.0, 0)?;
    let u_raw = f.u.expect("u requested");
    let vt_raw = f.v_t.expect("v_t requested");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        f.singular_values[j]
            .partial_cmp(&f.singular_values[i])
            .expect("finite singular values")
    });
    let sigma: Vec<f64> = order.iter().map(|&i| f.singular_values[i].max(0.0)).collect();
    let mut u = CMat::zeros(n, n);
    let v_full = vt_raw.adjoint();
    let mut v = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        u.column_mut(dst).copy_from(&u_raw.column(src));
        v.column_mut(dst).copy_from(&v_full.column(src));
    }
    Some(SvdDecomposition { u, sigma, v })
}

/// SVD through the Hermitian eigendecomposition of `X* X`: the right
/// factor and singular values come from the Gram matrix, left columns
/// are `X v_i / sigma_i` re-orthonormalized, and columns belonging to
/// numerically vanishing singular values are completed from the
/// orthogonal complement.
fn svd_via_gram(x: &ComplexMatrix) -> Result<SvdDecomposition> {
    let n = x.rows();
    let tol = Tolerances::default();
    let gram = HermitianMatrix::symmetrize(&(x.matrix().adjoint() * x.matrix()));
    let gdec = eigh(&gram, &tol)?;
    let v = gdec.unitary().clone();
    // eigenvalues of the Gram matrix carry O(eps |G|) noise; left as-is
    // the square root would turn an exact kernel into singular values of
    // size sqrt(eps) |X|, so snap them to zero first
    let lam_max = gdec.eigenvalues().first().copied().unwrap_or(0.0).max(0.0);
    let lam_floor = (n as f64) * f64::EPSILON * lam_max;
    let sigma: Vec<f64> = gdec
        .eigenvalues()
        .iter()
        .map(|&l| if l <= lam_floor { 0.0 } else { l.sqrt() })
        .collect();

    // left columns X v_i / sigma_i are reliable while sigma_i stays
    // clear of roundoff in |X|
    let floor = f64::EPSILON * (1.0 + x.max_abs()) * (n as f64);
    let mut u = CMat::zeros(n, n);
    let mut computed = 0;
    for (i, &sig) in sigma.iter().enumerate() {
        if sig <= floor {
            break;
        }
        let mut col = x.matrix() * v.column(i);
        col /= cplx(sig);
        // two rounds of Gram-Schmidt against the accepted columns
        for _ in 0..2 {
            for j in 0..computed {
                let proj = u.column(j).dotc(&col);
                let correction = u.column(j) * proj;
                col -= correction;
            }
        }
        let norm = col.norm();
        if norm <= 0.5 {
            break;
        }
        col /= cplx(norm);
        u.column_mut(i).copy_from(&col);
        computed += 1;
    }

    if computed < n {
        let u_r = u.columns(0, computed).into_owned();
        let complement = orthonormal_complement(&u_r, n - computed, &tol)?;
        for k in 0..(n - computed) {
            u.column_mut(computed + k).copy_from(&complement.column(k));
        }
    }
    Ok(SvdDecomposition { u, sigma, v })
}

/// Orthonormal basis of the orthogonal complement of the column span,
/// obtained from the top eigenvectors of the complement projector.
fn orthonormal_complement(u_r: &CMat, want: usize, tol: &Tolerances) -> Result<CMat> {
    let n = u_r.nrows();
    let projector = HermitianMatrix::symmetrize(&(identity(n) - u_r * u_r.adjoint()));
    let pdec = eigh(&projector, tol)?;
    Ok(pdec.unitary().columns(0, want).into_owned())
}

/// Count of eigenvalues above the relative rank threshold
/// `rank_tol * max(1, alpha[0])`. Input must be sorted descending; the
/// trailing `n - l` entries are the numerical kernel.
pub fn numerical_rank(alpha: &[f64], rank_tol: f64) -> usize {
    if alpha.is_empty() {
        return 0;
    }
    let threshold = rank_tol * alpha[0].max(1.0);
    alpha.iter().take_while(|&&a| a > threshold).count()
}

/// Real matrix power `A^s` of a positive semi-definite Hermitian matrix,
/// `s > 0`. Eigenvalues within `psd_tol` below zero are clipped to zero
/// before powering; anything further below is rejected.
pub fn matrix_power(a: &HermitianMatrix, s: f64, tol: &Tolerances) -> Result<HermitianMatrix> {
    if !s.is_finite() || s <= 0.0 {
        return Err(Error::InvalidExponent {
            value: s,
            requirement: "matrix power requires a finite s > 0",
        });
    }
    let dec = eigh(a, tol)?;
    power_from_decomposition(&dec, s, tol)
}

/// `A^s` evaluated from an existing eigendecomposition.
pub fn power_from_decomposition(
    dec: &SpectralDecomposition,
    s: f64,
    tol: &Tolerances,
) -> Result<HermitianMatrix> {
    let alpha = dec.eigenvalues();
    let scale = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let floor = tol.psd_floor(scale);
    if let Some(&min) = alpha.last() {
        if min < -floor {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                tol: floor,
            });
        }
    }
    dec.apply(|t| if t <= 0.0 { 0.0 } else { t.powf(s) })
}

/// Matrix modulus `|X| = (X*X)^{1/2}`, computed as `V diag(sigma) V*`
/// from the SVD of `X`.
pub fn matrix_modulus(x: &ComplexMatrix) -> Result<HermitianMatrix> {
    let dec = svd(x)?;
    let d = CMat::from_fn(dec.dim(), dec.dim(), |i, j| {
        if i == j {
            C64::new(dec.sigma[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(HermitianMatrix::symmetrize(&(dec.right() * d * dec.right().adjoint())))
}

pub(crate) fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub(crate) fn cplx(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}
