//! Spectral projectors onto the range and kernel clusters of a
//! perturbed diagonal matrix, exact and to first order.
//!
//! For `diag(alpha) + E` with `alpha` descending and a trailing kernel
//! of dimension `m = n - l`, the perturbed spectrum separates into `l`
//! eigenvalues near `alpha_plus` and `m` near zero as long as the
//! perturbation stays below the spectral gap. [`spectral_projectors`]
//! returns the exact Riesz projectors of the two clusters (sums of
//! eigenprojections — contour integrals reduce to finite sums here, and
//! no quadrature error can contaminate order measurements).
//! [`projector_first_order`] is the rank-one-in-`E` expansion of the
//! same pair; the two agree to second order in the perturbation.

use crate::error::{Error, Result};
use crate::factor::{cplx, eigh, identity};
use crate::matrix::{CMat, ComplexMatrix, HermitianMatrix};
use crate::split::assemble_blocks;
use crate::tol::Tolerances;

/// Complementary pair of projectors: `p1` spans the non-zero cluster,
/// `p0` the kernel-side cluster, `p0 + p1 = I`.
#[derive(Debug, Clone)]
pub struct ProjectorPair {
    pub p0: HermitianMatrix,
    pub p1: HermitianMatrix,
}

impl ProjectorPair {
    /// Residuals of the defining properties, for checks:
    /// `(|p0 + p1 - I|, max(|p0^2 - p0|, |p1^2 - p1|))` in Frobenius norm.
    pub fn residuals(&self) -> (f64, f64) {
        let n = self.p0.dim();
        let sum = (self.p0.matrix() + self.p1.matrix()) - identity(n);
        let idem0 = self.p0.matrix() * self.p0.matrix() - self.p0.matrix();
        let idem1 = self.p1.matrix() * self.p1.matrix() - self.p1.matrix();
        (sum.norm(), idem0.norm().max(idem1.norm()))
    }
}

/// Exact projectors of `diag(alpha) + E` onto the `l` largest
/// eigenvalues (`p1`) and the rest (`p0`).
///
/// Requires the perturbed clusters to stay separated: the gap between
/// the `l`-th and `(l+1)`-th perturbed eigenvalue must be at least a
/// quarter of the smallest positive unperturbed eigenvalue.
pub fn spectral_projectors(
    alpha: &[f64],
    e_tilde: &HermitianMatrix,
    l: usize,
    tol: &Tolerances,
) -> Result<ProjectorPair> {
    let n = e_tilde.dim();
    if alpha.len() != n {
        return Err(Error::ShapeMismatch {
            expected_rows: alpha.len(),
            expected_cols: alpha.len(),
            rows: n,
            cols: n,
        });
    }
    if l > n {
        return Err(Error::BlockSizeTooLarge { l, n });
    }
    let mut perturbed = e_tilde.matrix().clone();
    for (i, &a) in alpha.iter().enumerate() {
        perturbed[(i, i)] += cplx(a);
    }
    let dec = eigh(&HermitianMatrix::symmetrize(&perturbed), tol)?;

    if l > 0 && l < n {
        let gap_unperturbed = alpha[l - 1];
        let sep_required = gap_unperturbed / 4.0;
        let mu = dec.eigenvalues();
        let gap = mu[l - 1] - mu[l];
        if gap < sep_required {
            return Err(Error::SeparationViolated {
                gap,
                required: sep_required,
            });
        }
    }

    let w1 = dec.unitary().columns(0, l).into_owned();
    let p1 = HermitianMatrix::symmetrize(&(&w1 * w1.adjoint()));
    let p0 = HermitianMatrix::symmetrize(&(identity(n) - p1.matrix()));
    Ok(ProjectorPair { p0, p1 })
}

/// First-order projectors built from the off-diagonal block `C` of the
/// perturbation:
///
/// ```text
/// p1 = [ I            L^{-1} C ]      p0 = [ 0           -L^{-1} C ]
///      [ C* L^{-1}    0        ]           [ -C* L^{-1}   I        ]
/// ```
///
/// with `L = diag(alpha_plus)`. The pair sums to the identity exactly
/// but is idempotent only to second order in `C`.
pub fn projector_first_order(
    alpha_plus: &[f64],
    c_block: &ComplexMatrix,
) -> Result<ProjectorPair> {
    let l = alpha_plus.len();
    let m = c_block.cols();
    if c_block.rows() != l {
        return Err(Error::ShapeMismatch {
            expected_rows: l,
            expected_cols: m,
            rows: c_block.rows(),
            cols: c_block.cols(),
        });
    }
    for (i, &a) in alpha_plus.iter().enumerate() {
        if a == 0.0 {
            return Err(Error::NonPositiveEntry { index: i, value: a });
        }
    }
    // L^{-1} C, applied row by row
    let mut scaled = c_block.matrix().clone();
    for i in 0..l {
        let inv = cplx(1.0 / alpha_plus[i]);
        for j in 0..m {
            scaled[(i, j)] *= inv;
        }
    }
    let scaled_adj = scaled.adjoint();
    let p1 = assemble_blocks(&identity(l), &scaled, &scaled_adj, &CMat::zeros(m, m));
    let p0 = assemble_blocks(
        &CMat::zeros(l, l),
        &(-&scaled),
        &(-&scaled_adj),
        &identity(m),
    );
    Ok(ProjectorPair {
        p0: HermitianMatrix::symmetrize(&p0),
        p1: HermitianMatrix::symmetrize(&p1),
    })
}
