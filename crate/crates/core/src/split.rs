//! Block decompositions of a perturbation in the basis of the matrix it
//! perturbs.
//!
//! For a Hermitian perturbation `E_hat` of `diag(alpha)` with trailing
//! kernel, [`schur_split`] expresses the bottom-right block through a
//! Schur complement:
//!
//! ```text
//! E_hat = [ B    C                              ]
//!         [ C*   C* (L + B)^{-1} C  +  D        ]      L = diag(alpha_plus)
//! ```
//!
//! so that `diag(alpha) + E_hat` is positive semi-definite exactly when
//! `D` is (given `L + B` positive definite). For a general perturbation
//! of a matrix with known SVD, [`modulus_split`] produces the four
//! blocks of the rotated perturbation `U* Z V`.

use crate::error::{Error, Result};
use crate::factor::{eigh, numerical_rank, svd, SvdDecomposition};
use crate::matrix::{CMat, ComplexMatrix, HermitianMatrix};
use crate::tol::Tolerances;

/// Schur-complement block decomposition of a Hermitian perturbation.
#[derive(Debug, Clone)]
pub struct SchurSplit {
    alpha_plus: Vec<f64>,
    b: CMat,
    c: CMat,
    d: CMat,
}

impl SchurSplit {
    /// Positive eigenvalues of the unperturbed matrix.
    pub fn alpha_plus(&self) -> &[f64] {
        &self.alpha_plus
    }

    /// Top-left `l x l` block of the perturbation.
    pub fn b(&self) -> &CMat {
        &self.b
    }

    /// Off-diagonal `l x m` block.
    pub fn c(&self) -> &CMat {
        &self.c
    }

    /// The `m x m` Schur complement, re-Hermitized.
    pub fn d(&self) -> &CMat {
        &self.d
    }

    /// Rank-side block size `l`.
    pub fn l(&self) -> usize {
        self.alpha_plus.len()
    }

    /// Kernel-side block size `m`.
    pub fn m(&self) -> usize {
        self.d.nrows()
    }

    pub fn dim(&self) -> usize {
        self.l() + self.m()
    }

    /// The Schur complement as a certified Hermitian matrix.
    pub fn d_hermitian(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrize(&self.d)
    }
}

/// Assemble a square matrix from four blocks. `tl` is `l x l`,
/// `br` is `m x m`.
pub(crate) fn assemble_blocks(tl: &CMat, tr: &CMat, bl: &CMat, br: &CMat) -> CMat {
    let l = tl.nrows();
    let m = br.nrows();
    debug_assert_eq!(tr.shape(), (l, m));
    debug_assert_eq!(bl.shape(), (m, l));
    let n = l + m;
    let mut out = CMat::zeros(n, n);
    out.view_mut((0, 0), (l, l)).copy_from(tl);
    out.view_mut((0, l), (l, m)).copy_from(tr);
    out.view_mut((l, 0), (m, l)).copy_from(bl);
    out.view_mut((l, l), (m, m)).copy_from(br);
    out
}

fn validate_split_inputs(alpha: &[f64], e_hat: &HermitianMatrix, l: usize) -> Result<()> {
    let n = e_hat.dim();
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
    for (i, w) in alpha.windows(2).enumerate() {
        if w[0] < w[1] {
            return Err(Error::NotDescending { index: i + 1 });
        }
    }
    Ok(())
}

/// Minimum eigenvalue of a Hermitian matrix given as raw storage.
fn min_eigenvalue(m: &CMat, tol: &Tolerances) -> Result<f64> {
    if m.nrows() == 0 {
        // empty block: vacuously positive definite
        return Ok(f64::INFINITY);
    }
    let h = HermitianMatrix::symmetrize(m);
    let dec = eigh(&h, tol)?;
    Ok(*dec.eigenvalues().last().expect("nonempty"))
}

/// `diag(alpha_plus) + B` with the positive-definiteness gate applied:
/// its minimum eigenvalue must exceed `psd_tol * max(1, alpha[0])`.
fn shifted_block(alpha_plus: &[f64], b: &CMat, alpha_head: f64, tol: &Tolerances) -> Result<CMat> {
    let l = alpha_plus.len();
    let mut shifted = b.clone();
    for i in 0..l {
        shifted[(i, i)] += crate::factor::cplx(alpha_plus[i]);
    }
    let required = tol.psd_tol * alpha_head.max(1.0);
    let min = min_eigenvalue(&shifted, tol)?;
    if min <= required {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
            required,
        });
    }
    Ok(shifted)
}

/// Split a Hermitian perturbation at block size `l`.
///
/// `alpha` must be descending with its trailing `n - l` entries treated
/// as zero. Fails when `diag(alpha_plus) + B` is not positive definite,
/// which signals a perturbation too large for the decomposition.
pub fn schur_split(
    alpha: &[f64],
    e_hat: &HermitianMatrix,
    l: usize,
    tol: &Tolerances,
) -> Result<SchurSplit> {
    validate_split_inputs(alpha, e_hat, l)?;
    let n = e_hat.dim();
    let m = n - l;
    let alpha_plus: Vec<f64> = alpha[..l].to_vec();
    let e = e_hat.matrix();
    let b = e.view((0, 0), (l, l)).into_owned();
    let c = e.view((0, l), (l, m)).into_owned();
    let e22 = e.view((l, l), (m, m)).into_owned();

    let alpha_head = alpha.first().copied().unwrap_or(0.0);
    let shifted = shifted_block(&alpha_plus, &b, alpha_head, tol)?;

    // D = E22 - C* (L+B)^{-1} C, with the inverse applied as a solve.
    let d = if l == 0 || m == 0 {
        e22
    } else {
        let lu = shifted.lu();
        let y = lu
            .solve(&c)
            .ok_or_else(|| Error::Numerical("singular shifted block in Schur solve".into()))?;
        let correction = c.adjoint() * y;
        HermitianMatrix::symmetrize(&(e22 - correction))
            .matrix()
            .clone()
    };

    Ok(SchurSplit { alpha_plus, b, c, d })
}

/// Exact inverse of [`schur_split`]: rebuild the perturbation
/// `[[B, C], [C*, C*(L+B)^{-1}C + D]]`.
pub fn schur_reassemble(split: &SchurSplit) -> Result<HermitianMatrix> {
    let l = split.l();
    let m = split.m();
    if l == 0 || m == 0 {
        let full = assemble_blocks(&split.b, &split.c, &split.c.adjoint(), &split.d);
        return Ok(HermitianMatrix::symmetrize(&full));
    }
    let mut shifted = split.b.clone();
    for i in 0..l {
        shifted[(i, i)] += crate::factor::cplx(split.alpha_plus[i]);
    }
    let lu = shifted.lu();
    let y = lu
        .solve(&split.c)
        .ok_or_else(|| Error::Numerical("singular shifted block in Schur solve".into()))?;
    let e22 = split.c.adjoint() * y + &split.d;
    let full = assemble_blocks(&split.b, &split.c, &split.c.adjoint(), &e22);
    Ok(HermitianMatrix::symmetrize(&full))
}

/// Evaluate both sides of the positive-semidefiniteness equivalence:
/// returns `(diag(alpha) + E_hat is PSD, D is PSD)`. Under the
/// positive-definiteness precondition on `diag(alpha_plus) + B` the two
/// booleans agree; they are exposed separately for property testing.
pub fn psd_iff_schur_complement(
    alpha: &[f64],
    e_hat: &HermitianMatrix,
    l: usize,
    tol: &Tolerances,
) -> Result<(bool, bool)> {
    let split = schur_split(alpha, e_hat, l, tol)?;
    let n = e_hat.dim();
    let mut perturbed = e_hat.matrix().clone();
    for i in 0..n {
        let a = if i < l { alpha[i] } else { 0.0 };
        perturbed[(i, i)] += crate::factor::cplx(a);
    }
    let alpha_head = alpha.first().copied().unwrap_or(0.0);
    let threshold = -tol.psd_tol * alpha_head.max(1.0);
    let whole_min = min_eigenvalue(&perturbed, tol)?;
    let d_min = min_eigenvalue(&split.d, tol)?;
    Ok((whole_min >= threshold, d_min >= threshold))
}

/// Blocks of a general perturbation rotated into the singular-vector
/// basis of the matrix it perturbs.
#[derive(Debug, Clone)]
pub struct ModulusSplit {
    sigma_plus: Vec<f64>,
    z11: CMat,
    z12: CMat,
    z21: CMat,
    z22: CMat,
}

impl ModulusSplit {
    /// Positive singular values of the unperturbed matrix.
    pub fn sigma_plus(&self) -> &[f64] {
        &self.sigma_plus
    }

    pub fn z11(&self) -> &CMat {
        &self.z11
    }

    pub fn z12(&self) -> &CMat {
        &self.z12
    }

    pub fn z21(&self) -> &CMat {
        &self.z21
    }

    pub fn z22(&self) -> &CMat {
        &self.z22
    }

    pub fn l(&self) -> usize {
        self.sigma_plus.len()
    }

    pub fn m(&self) -> usize {
        self.z22.nrows()
    }

    pub fn dim(&self) -> usize {
        self.l() + self.m()
    }

    /// Build directly from blocks. `sigma_plus` must be strictly
    /// positive and descending.
    pub fn from_blocks(
        sigma_plus: Vec<f64>,
        z11: CMat,
        z12: CMat,
        z21: CMat,
        z22: CMat,
    ) -> Result<Self> {
        let l = sigma_plus.len();
        let m = z22.nrows();
        for (i, &s) in sigma_plus.iter().enumerate() {
            if !s.is_finite() || s <= 0.0 {
                return Err(Error::NonPositiveEntry { index: i, value: s });
            }
        }
        for (i, w) in sigma_plus.windows(2).enumerate() {
            if w[0] < w[1] {
                return Err(Error::NotDescending { index: i + 1 });
            }
        }
        let shapes_ok = z11.shape() == (l, l)
            && z12.shape() == (l, m)
            && z21.shape() == (m, l)
            && z22.shape() == (m, m);
        if !shapes_ok {
            return Err(Error::ShapeMismatch {
                expected_rows: l + m,
                expected_cols: l + m,
                rows: z11.nrows() + z21.nrows(),
                cols: z11.ncols() + z12.ncols(),
            });
        }
        Ok(ModulusSplit {
            sigma_plus,
            z11,
            z12,
            z21,
            z22,
        })
    }

    /// Reassemble the rotated perturbation `U* Z V` from the blocks.
    pub fn reassemble(&self) -> CMat {
        assemble_blocks(&self.z11, &self.z12, &self.z21, &self.z22)
    }
}

/// Factor `X` and split `U* Z V` at the numerical rank of `X`.
pub fn modulus_split(
    x: &ComplexMatrix,
    z: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(SvdDecomposition, ModulusSplit)> {
    if !x.is_square() {
        return Err(Error::NotSquare {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    if x.rows() != z.rows() || x.cols() != z.cols() {
        return Err(Error::ShapeMismatch {
            expected_rows: x.rows(),
            expected_cols: x.cols(),
            rows: z.rows(),
            cols: z.cols(),
        });
    }
    let dec = svd(x)?;
    let split = split_rotated(&dec, z, tol)?;
    Ok((dec, split))
}

/// Split `U* Z V` for an existing SVD.
pub fn split_rotated(
    dec: &SvdDecomposition,
    z: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ModulusSplit> {
    let n = dec.dim();
    if z.rows() != n || z.cols() != n {
        return Err(Error::ShapeMismatch {
            expected_rows: n,
            expected_cols: n,
            rows: z.rows(),
            cols: z.cols(),
        });
    }
    let l = numerical_rank(dec.singular_values(), tol.rank_tol);
    let m = n - l;
    let rotated = dec.left().adjoint() * z.matrix() * dec.right();
    let z11 = rotated.view((0, 0), (l, l)).into_owned();
    let z12 = rotated.view((0, l), (l, m)).into_owned();
    let z21 = rotated.view((l, 0), (m, l)).into_owned();
    let z22 = rotated.view((l, l), (m, m)).into_owned();
    Ok(ModulusSplit {
        sigma_plus: dec.singular_values()[..l].to_vec(),
        z11,
        z12,
        z21,
        z22,
    })
}
