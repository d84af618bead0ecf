//! First-order perturbation approximations.
//!
//! For a Hermitian matrix `A = U diag(alpha) U*` and a small Hermitian
//! perturbation `E`, the Daleckii-Krein theorem gives
//!
//! ```text
//! f(A + E) = f(A) + U ( [f, alpha] o U*EU ) U*  +  O(|E|^2)
//! ```
//!
//! whenever `f` is smooth near the spectrum ([`dk_approx`]). When `A` is
//! positive semi-definite *with a kernel* and `f = t^{1/p}`, the
//! derivative no longer exists; [`power_approx`] evaluates the
//! non-linear replacement in which the off-kernel blocks of the rotated
//! perturbation enter linearly while the kernel block contributes
//! `D^{1/p}` of its Schur complement. The error is `O(|E|^r)` with
//! `r = min(1 + 1/p, 3/p)` for `1 < p < 3`. [`power_approx_s`] is the
//! analogous form for `A^s`, `s > 1`, and [`modulus_approx`] the form
//! for `|X + Z|` with general square `X` and `Z`, accurate to
//! `O(|Z|^{3/2})`.

use crate::error::{Error, Result};
use crate::factor::{cplx, eigh, matrix_modulus, numerical_rank, SpectralDecomposition, SvdDecomposition};
use crate::loewner::{divided_difference, power_dd_one, sqrt_divided_difference, xi_sigma_alpha, xi_sigma_plus};
use crate::matrix::{CMat, ComplexMatrix, HermitianMatrix};
use crate::split::{assemble_blocks, modulus_split, schur_split, ModulusSplit, SchurSplit};
use crate::tol::Tolerances;

/// Convergence order claimed for an approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectedOrder {
    /// Error is `O(t^r)` in the perturbation size `t`.
    Known(f64),
    /// The formula is evaluated but no order is asserted (fractional
    /// powers with `p >= 3`).
    Unguaranteed,
}

impl ExpectedOrder {
    pub fn value(&self) -> Option<f64> {
        match self {
            ExpectedOrder::Known(r) => Some(*r),
            ExpectedOrder::Unguaranteed => None,
        }
    }
}

/// Error order of the singular-case power formula.
pub fn power_order(p: f64) -> ExpectedOrder {
    if p > 1.0 && p < 3.0 {
        ExpectedOrder::Known((1.0 + 1.0 / p).min(3.0 / p))
    } else {
        ExpectedOrder::Unguaranteed
    }
}

/// Result of a fractional-power or integer-power approximation.
#[derive(Debug, Clone)]
pub struct PowerApproxResult {
    /// `base + first_order_term`, assembled exactly.
    pub approximation: HermitianMatrix,
    /// The conjugated Hadamard correction alone.
    pub first_order_term: HermitianMatrix,
    /// `A^{1/p}` (respectively `A^s`) used as the expansion point.
    pub base: HermitianMatrix,
    /// Block decomposition of the rotated perturbation.
    pub split: SchurSplit,
    /// Exponent parameter: `p` for the `1/p` form, `s` for the `s > 1`
    /// form.
    pub exponent_param: f64,
    pub expected_order: ExpectedOrder,
}

/// Result of a matrix-modulus approximation.
#[derive(Debug, Clone)]
pub struct ModulusApproxResult {
    /// `base + first_order_term`, assembled exactly.
    pub approximation: HermitianMatrix,
    /// The conjugated correction alone.
    pub first_order_term: HermitianMatrix,
    /// `|X|` used as the expansion point.
    pub base: HermitianMatrix,
    /// Blocks of the rotated perturbation.
    pub split: ModulusSplit,
    /// Always 3/2.
    pub expected_order: ExpectedOrder,
}

fn check_same_dim(dec_dim: usize, e: &HermitianMatrix) -> Result<()> {
    if e.dim() != dec_dim {
        return Err(Error::ShapeMismatch {
            expected_rows: dec_dim,
            expected_cols: dec_dim,
            rows: e.dim(),
            cols: e.dim(),
        });
    }
    Ok(())
}

/// The Daleckii-Krein correction term `U ([f, alpha] o U*EU) U*` alone.
pub fn dk_first_order_term<F, G>(
    dec: &SpectralDecomposition,
    e: &HermitianMatrix,
    f: F,
    f_prime: G,
    tol: &Tolerances,
) -> Result<HermitianMatrix>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    check_same_dim(dec.dim(), e)?;
    let dd = divided_difference(f, f_prime, dec.eigenvalues(), tol)?;
    let e_hat = dec.rotate_into(e.matrix());
    let e_hat = HermitianMatrix::symmetrize(&e_hat);
    let term = dd.hadamard(e_hat.matrix())?;
    Ok(HermitianMatrix::symmetrize(&dec.conjugate(&term)))
}

/// First-order Daleckii-Krein approximation `f(A) + U([f,alpha] o Ê)U*`.
///
/// `f` must be twice differentiable near every eigenvalue; in particular
/// fractional powers require a strictly positive spectrum — a kernel
/// must go through [`power_approx`] instead.
pub fn dk_approx<F, G>(
    dec: &SpectralDecomposition,
    e: &HermitianMatrix,
    f: F,
    f_prime: G,
    tol: &Tolerances,
) -> Result<HermitianMatrix>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let term = dk_first_order_term(dec, e, &f, &f_prime, tol)?;
    let base = dec.apply(&f)?;
    base.add(&term)
}

/// Daleckii-Krein approximation of `(A + E)^{1/p}` for nonsingular
/// positive definite `A`. Rejects a numerically singular `A` with
/// guidance to use the non-linear singular-case formula.
pub fn dk_fractional_power(
    dec: &SpectralDecomposition,
    e: &HermitianMatrix,
    p: f64,
    tol: &Tolerances,
) -> Result<HermitianMatrix> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::InvalidExponent {
            value: p,
            requirement: "fractional power requires a finite p > 0",
        });
    }
    check_same_dim(dec.dim(), e)?;
    let alpha = dec.eigenvalues();
    let rank = numerical_rank(alpha, tol.rank_tol);
    if rank < dec.dim() {
        return Err(Error::KernelPresent {
            rank,
            dim: dec.dim(),
        });
    }
    let s = 1.0 / p;
    let dd = if p == 2.0 {
        sqrt_divided_difference(alpha)?
    } else {
        divided_difference(|t| t.powf(s), |t| s * t.powf(s - 1.0), alpha, tol)?
    };
    let e_hat = HermitianMatrix::symmetrize(&dec.rotate_into(e.matrix()));
    let term = HermitianMatrix::symmetrize(&dec.conjugate(&dd.hadamard(e_hat.matrix())?));
    let base = dec.apply(|t| t.powf(s))?;
    base.add(&term)
}

/// Eigenvalues with the trailing kernel clamped to exact zeros, plus the
/// PSD gate on `A` itself.
fn clamped_spectrum(dec: &SpectralDecomposition, tol: &Tolerances) -> Result<(Vec<f64>, usize)> {
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
    let l = numerical_rank(alpha, tol.rank_tol);
    let clamped: Vec<f64> = alpha
        .iter()
        .enumerate()
        .map(|(i, &a)| if i < l { a } else { 0.0 })
        .collect();
    Ok((clamped, l))
}

fn power_approx_inner(
    dec: &SpectralDecomposition,
    e: &HermitianMatrix,
    power: f64,
    exponent_param: f64,
    expected_order: ExpectedOrder,
    tol: &Tolerances,
) -> Result<PowerApproxResult> {
    check_same_dim(dec.dim(), e)?;
    let (alpha, l) = clamped_spectrum(dec, tol)?;

    let e_hat = HermitianMatrix::symmetrize(&dec.rotate_into(e.matrix()));
    let split = schur_split(&alpha, &e_hat, l, tol)?;

    // positivity of the perturbed matrix is equivalent to positivity of
    // the Schur complement here, so gate on D directly
    let d_herm = split.d_hermitian();
    let d_pow = if split.m() == 0 {
        CMat::zeros(0, 0)
    } else {
        let d_dec = eigh(&d_herm, tol)?;
        let d_scale = d_dec.eigenvalues().iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let d_floor = tol.psd_floor(d_scale.max(alpha.first().copied().unwrap_or(0.0)));
        let d_min = *d_dec.eigenvalues().last().expect("nonempty");
        if d_min < -d_floor {
            return Err(Error::NotPsd {
                min_eigenvalue: d_min,
                tol: d_floor,
            });
        }
        d_dec
            .apply(|t| if t <= 0.0 { 0.0 } else { t.powf(power) })?
            .matrix()
            .clone()
    };

    let dd = power_dd_one(power, &alpha, tol)?;
    let inner = assemble_blocks(split.b(), split.c(), &split.c().adjoint(), &d_pow);
    let term_inner = dd.hadamard(&inner)?;
    let first_order_term = HermitianMatrix::symmetrize(&dec.conjugate(&term_inner));

    let base = dec.apply_clamped_power(&alpha, power)?;
    let approximation = base.add(&first_order_term)?;

    Ok(PowerApproxResult {
        approximation,
        first_order_term,
        base,
        split,
        exponent_param,
        expected_order,
    })
}

impl SpectralDecomposition {
    fn apply_clamped_power(&self, clamped: &[f64], power: f64) -> Result<HermitianMatrix> {
        let values: Vec<f64> = clamped
            .iter()
            .map(|&a| if a <= 0.0 { 0.0 } else { a.powf(power) })
            .collect();
        Ok(self.conjugate_diagonal(&values))
    }
}

/// Non-linear first-order approximation of `(A + E)^{1/p}` for positive
/// semi-definite `A`, valid also when `A` has a kernel.
///
/// Preconditions: `A` PSD (within tolerance), `A + E` PSD (checked
/// through the Schur complement), and `diag(alpha_plus) + B` positive
/// definite. For `1 < p < 3` the error order is
/// `r = min(1 + 1/p, 3/p)`; for `p >= 3` the formula is still evaluated
/// but the order is stamped unguaranteed. When `A` has no kernel the
/// result coincides with [`dk_approx`] for `f = t^{1/p}`.
pub fn power_approx(
    dec: &SpectralDecomposition,
    e: &HermitianMatrix,
    p: f64,
    tol: &Tolerances,
) -> Result<PowerApproxResult> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidExponent {
            value: p,
            requirement: "the fractional-power form requires a finite p > 1 (use the s-form for s >= 1)",
        });
    }
    power_approx_inner(dec, e, 1.0 / p, p, power_order(p), tol)
}

/// The `A^s` variant for `s > 1`: same block assembly with `D^s` in the
/// kernel block, second-order accurate.
pub fn power_approx_s(
    dec: &SpectralDecomposition,
    e: &HermitianMatrix,
    s: f64,
    tol: &Tolerances,
) -> Result<PowerApproxResult> {
    if !s.is_finite() || s <= 1.0 {
        return Err(Error::InvalidExponent {
            value: s,
            requirement: "the s-form requires a finite s > 1 (use the fractional-power form for p > 1)",
        });
    }
    power_approx_inner(dec, e, s, s, ExpectedOrder::Known(2.0), tol)
}

/// The modulus correction assembled from an existing SVD and block
/// split. This is the formula layer: it reads only the `11`, `12` and
/// `22` blocks of the rotated perturbation — the `21` block has no
/// influence on the output, by construction.
pub fn modulus_first_order(
    svd: &SvdDecomposition,
    split: &ModulusSplit,
) -> Result<ModulusApproxResult> {
    let l = split.l();
    let m = split.m();
    if svd.dim() != split.dim() {
        return Err(Error::ShapeMismatch {
            expected_rows: svd.dim(),
            expected_cols: svd.dim(),
            rows: split.dim(),
            cols: split.dim(),
        });
    }

    let top_left = if l == 0 {
        CMat::zeros(0, 0)
    } else {
        let xi = xi_sigma_plus(split.sigma_plus())?;
        let mut sym = CMat::zeros(l, l);
        // Lambda Z11 + Z11* Lambda, with Lambda = diag(sigma_plus)
        for i in 0..l {
            for j in 0..l {
                sym[(i, j)] = cplx(split.sigma_plus()[i]) * split.z11()[(i, j)]
                    + split.z11()[(j, i)].conj() * cplx(split.sigma_plus()[j]);
            }
        }
        xi.hadamard(&sym)?
    };

    let bottom_right = if m == 0 {
        CMat::zeros(0, 0)
    } else {
        matrix_modulus(&ComplexMatrix::from_dmatrix(split.z22().clone())?)?
            .matrix()
            .clone()
    };

    let inner = assemble_blocks(&top_left, split.z12(), &split.z12().adjoint(), &bottom_right);
    let v = svd.right();
    let first_order_term = HermitianMatrix::symmetrize(&(v * inner * v.adjoint()));

    // |X| with the kernel-side singular values clamped to exact zeros
    let sigma_eff: Vec<f64> = svd
        .singular_values()
        .iter()
        .enumerate()
        .map(|(i, &s)| if i < l { s } else { 0.0 })
        .collect();
    let d = CMat::from_fn(svd.dim(), svd.dim(), |i, j| {
        if i == j {
            cplx(sigma_eff[i])
        } else {
            cplx(0.0)
        }
    });
    let base = HermitianMatrix::symmetrize(&(v * d * v.adjoint()));
    let approximation = base.add(&first_order_term)?;

    Ok(ModulusApproxResult {
        approximation,
        first_order_term,
        base,
        split: split.clone(),
        expected_order: ExpectedOrder::Known(1.5),
    })
}

/// First-order approximation of `|X + Z|` for general square `X`, `Z`,
/// accurate to `O(|Z|^{3/2})`. Total: any perturbation is accepted,
/// accuracy simply degrades as `|Z|` grows.
pub fn modulus_approx(
    x: &ComplexMatrix,
    z: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ModulusApproxResult> {
    let (svd, split) = modulus_split(x, z, tol)?;
    modulus_first_order(&svd, &split)
}

/// Simplified form for positive semi-definite `X` and Hermitian `Z`:
/// the rotated perturbation enters directly, only its kernel block goes
/// through the modulus. Agrees with [`modulus_approx`] in this regime.
pub fn modulus_approx_psd(
    x: &HermitianMatrix,
    z: &HermitianMatrix,
    tol: &Tolerances,
) -> Result<ModulusApproxResult> {
    check_same_dim(x.dim(), z)?;
    let dec = eigh(x, tol)?;
    let (alpha, l) = clamped_spectrum(&dec, tol)?;
    let n = dec.dim();
    let m = n - l;

    let z_hat = HermitianMatrix::symmetrize(&dec.rotate_into(z.matrix()));
    let zh = z_hat.matrix();
    let z11 = zh.view((0, 0), (l, l)).into_owned();
    let z12 = zh.view((0, l), (l, m)).into_owned();
    let z21 = zh.view((l, 0), (m, l)).into_owned();
    let z22 = zh.view((l, l), (m, m)).into_owned();

    let bottom_right = if m == 0 {
        CMat::zeros(0, 0)
    } else {
        matrix_modulus(&ComplexMatrix::from_dmatrix(z22.clone())?)?
            .matrix()
            .clone()
    };
    let inner = assemble_blocks(&z11, &z12, &z21, &bottom_right);
    let first_order_term = HermitianMatrix::symmetrize(&dec.conjugate(&inner));

    let base = dec.conjugate_diagonal(&alpha);
    let approximation = base.add(&first_order_term)?;

    let split = ModulusSplit::from_blocks(alpha[..l].to_vec(), z11, z12, z21, z22)?;
    Ok(ModulusApproxResult {
        approximation,
        first_order_term,
        base,
        split,
        expected_order: ExpectedOrder::Known(1.5),
    })
}

/// Simplified form for invertible Hermitian `X` and Hermitian `Z`:
/// `|X + Z| ~ |X| + V (Xi o V*ZV) V*` with the sign-aware kernel
/// `Xi(i,j) = (alpha_i + alpha_j) / (|alpha_i| + |alpha_j|)`.
pub fn modulus_approx_invertible(
    x: &HermitianMatrix,
    z: &HermitianMatrix,
    tol: &Tolerances,
) -> Result<ModulusApproxResult> {
    check_same_dim(x.dim(), z)?;
    let dec = eigh(x, tol)?;
    let alpha = dec.eigenvalues();
    let max_abs = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let threshold = tol.rank_tol * max_abs.max(1.0);
    let min_sigma = alpha.iter().fold(f64::INFINITY, |m, a| m.min(a.abs()));
    if min_sigma <= threshold {
        return Err(Error::Singular {
            min_sigma,
            threshold,
        });
    }

    let xi = xi_sigma_alpha(alpha)?;
    let z_hat = HermitianMatrix::symmetrize(&dec.rotate_into(z.matrix()));
    let term_inner = xi.hadamard(z_hat.matrix())?;
    let first_order_term = HermitianMatrix::symmetrize(&dec.conjugate(&term_inner));

    let moduli: Vec<f64> = alpha.iter().map(|a| a.abs()).collect();
    let base = dec.conjugate_diagonal(&moduli);
    let approximation = base.add(&first_order_term)?;

    // Report the genuine singular-basis blocks: reorder by modulus
    // (descending, nonnegative eigenvalue first on ties — the stable
    // sort preserves the descending eigenvalue order) and absorb the
    // signs into the left factor, so z11 = S P* (V*ZV) P.
    let n = dec.dim();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&i, &j| moduli[j].partial_cmp(&moduli[i]).expect("finite"));
    let sigma_sorted: Vec<f64> = perm.iter().map(|&i| moduli[i]).collect();
    let zh = z_hat.matrix();
    let z_rotated = CMat::from_fn(n, n, |i, j| {
        let sign = if alpha[perm[i]] >= 0.0 { 1.0 } else { -1.0 };
        zh[(perm[i], perm[j])] * cplx(sign)
    });
    let split = ModulusSplit::from_blocks(
        sigma_sorted,
        z_rotated,
        CMat::zeros(n, 0),
        CMat::zeros(0, n),
        CMat::zeros(0, 0),
    )?;
    Ok(ModulusApproxResult {
        approximation,
        first_order_term,
        base,
        split,
        expected_order: ExpectedOrder::Known(1.5),
    })
}
