//! Divided-difference (Loewner-type) matrices.
//!
//! Every first-order formula in this crate is a Hadamard product of a
//! perturbation block matrix with one of the real symmetric matrices
//! built here. Four constructions are provided:
//!
//! * [`divided_difference`] — `(f(a_i) - f(a_j)) / (a_i - a_j)` with the
//!   derivative on coincident pairs, for an arbitrary `C^1` function;
//! * [`sqrt_divided_difference`] — the cancellation-free closed form
//!   `1 / (sqrt(a_i) + sqrt(a_j))` for the square root;
//! * [`power_dd_one`] — the power-function variant that assigns `1` to
//!   pairs of zero eigenvalues, which is what lets the Schur-complement
//!   block of the singular-case formula pass through the Hadamard
//!   product unscaled;
//! * [`xi_sigma_plus`] / [`xi_sigma_alpha`] — the two kernels appearing
//!   in the matrix-modulus formula.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{CMat, C64};
use crate::tol::Tolerances;

/// Which construction produced a [`DividedDifferenceMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DividedDifferenceKind {
    /// General `C^1` function via the difference quotient.
    GeneralF,
    /// Power function with zero-pair entries set to one.
    PowerOne,
    /// `1 / (sigma_i + sigma_j)` on positive singular values.
    XiSigmaPlus,
    /// `(alpha_i + alpha_j) / (|alpha_i| + |alpha_j|)`.
    XiSigmaAlpha,
}

/// Real symmetric matrix of first divided differences.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedDifferenceMatrix {
    entries: DMatrix<f64>,
    kind: DividedDifferenceKind,
}

impl DividedDifferenceMatrix {
    fn build<F: FnMut(usize, usize) -> Result<f64>>(
        n: usize,
        kind: DividedDifferenceKind,
        mut entry: F,
    ) -> Result<Self> {
        // fill the upper triangle and mirror for exact symmetry
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = entry(i, j)?;
                if !v.is_finite() {
                    return Err(Error::Numerical(format!(
                        "divided-difference entry ({i},{j}) is not finite"
                    )));
                }
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(DividedDifferenceMatrix { entries: m, kind })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn kind(&self) -> DividedDifferenceKind {
        self.kind
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Hadamard product with a complex matrix of the same size.
    pub fn hadamard(&self, m: &CMat) -> Result<CMat> {
        let n = self.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::ShapeMismatch {
                expected_rows: n,
                expected_cols: n,
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(CMat::from_fn(n, n, |i, j| {
            m[(i, j)] * C64::new(self.entries[(i, j)], 0.0)
        }))
    }
}

fn pair_threshold(alpha: &[f64], tol: &Tolerances) -> f64 {
    let max_abs = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    tol.pair_tol * (1.0 + max_abs)
}

/// Divided differences of an arbitrary function: the quotient
/// `(f(a_i) - f(a_j)) / (a_i - a_j)` when `|a_i - a_j|` exceeds the pair
/// threshold, otherwise `f'(a_i)`.
pub fn divided_difference<F, G>(
    f: F,
    f_prime: G,
    alpha: &[f64],
    tol: &Tolerances,
) -> Result<DividedDifferenceMatrix>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let threshold = pair_threshold(alpha, tol);
    let values: Vec<f64> = alpha.iter().map(|&a| f(a)).collect();
    for (&a, &v) in alpha.iter().zip(&values) {
        if !v.is_finite() {
            return Err(Error::FunctionValueNotFinite { eigenvalue: a });
        }
    }
    DividedDifferenceMatrix::build(alpha.len(), DividedDifferenceKind::GeneralF, |i, j| {
        let (ai, aj) = (alpha[i], alpha[j]);
        if (ai - aj).abs() > threshold {
            Ok((values[i] - values[j]) / (ai - aj))
        } else {
            let d = f_prime(ai);
            if !d.is_finite() {
                return Err(Error::DerivativeNotFinite { eigenvalue: ai });
            }
            Ok(d)
        }
    })
}

/// Closed-form divided differences of the square root,
/// `1 / (sqrt(a_i) + sqrt(a_j))`. All eigenvalues must be nonnegative
/// and no pair may consist of two zeros (the entry would be infinite;
/// the power-one variant handles that regime).
pub fn sqrt_divided_difference(alpha: &[f64]) -> Result<DividedDifferenceMatrix> {
    for (i, &a) in alpha.iter().enumerate() {
        if a < 0.0 {
            return Err(Error::NotPsd {
                min_eigenvalue: a,
                tol: 0.0,
            });
        }
        let _ = i;
    }
    if alpha.contains(&0.0) {
        // the diagonal pairs a zero with itself
        return Err(Error::SqrtDividedDifferenceAtZero);
    }
    let roots: Vec<f64> = alpha.iter().map(|&a| a.sqrt()).collect();
    DividedDifferenceMatrix::build(alpha.len(), DividedDifferenceKind::GeneralF, |i, j| {
        Ok(1.0 / (roots[i] + roots[j]))
    })
}

/// Divided differences of `t^s` on nonnegative eigenvalues with the
/// zero-pair convention: entries where both eigenvalues vanish are set
/// to `1`, so a Hadamard product leaves the corresponding block intact.
///
/// For `s = 1/2` the cancellation-free closed form
/// `1 / (sqrt(a_i) + sqrt(a_j))` is always used; it is algebraically
/// identical to the quotient and exact near coincident eigenvalues.
pub fn power_dd_one(s: f64, alpha: &[f64], tol: &Tolerances) -> Result<DividedDifferenceMatrix> {
    if !s.is_finite() || s <= 0.0 {
        return Err(Error::InvalidExponent {
            value: s,
            requirement: "power divided difference requires a finite s > 0",
        });
    }
    for &a in alpha {
        if a < 0.0 {
            return Err(Error::NotPsd {
                min_eigenvalue: a,
                tol: 0.0,
            });
        }
    }
    let threshold = pair_threshold(alpha, tol);
    let sqrt_form = s == 0.5;
    DividedDifferenceMatrix::build(alpha.len(), DividedDifferenceKind::PowerOne, |i, j| {
        let (ai, aj) = (alpha[i], alpha[j]);
        if ai == 0.0 && aj == 0.0 {
            return Ok(1.0);
        }
        if sqrt_form {
            return Ok(1.0 / (ai.sqrt() + aj.sqrt()));
        }
        if (ai - aj).abs() > threshold {
            Ok((ai.powf(s) - aj.powf(s)) / (ai - aj))
        } else {
            // coincident positive pair: derivative, evaluated at the
            // larger value so a (0, tiny) tie stays finite for s < 1
            let a = ai.max(aj);
            Ok(s * a.powf(s - 1.0))
        }
    })
}

/// The kernel `1 / (sigma_i + sigma_j)` on strictly positive singular
/// values.
pub fn xi_sigma_plus(sigma_plus: &[f64]) -> Result<DividedDifferenceMatrix> {
    for (i, &s) in sigma_plus.iter().enumerate() {
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::NonPositiveEntry { index: i, value: s });
        }
    }
    DividedDifferenceMatrix::build(
        sigma_plus.len(),
        DividedDifferenceKind::XiSigmaPlus,
        |i, j| Ok(1.0 / (sigma_plus[i] + sigma_plus[j])),
    )
}

/// The kernel `(alpha_i + alpha_j) / (|alpha_i| + |alpha_j|)` for an
/// invertible Hermitian matrix with eigenvalues `alpha`. Every entry is
/// at most one in modulus. Rejects zero eigenvalues.
pub fn xi_sigma_alpha(alpha: &[f64]) -> Result<DividedDifferenceMatrix> {
    for (i, &a) in alpha.iter().enumerate() {
        if a == 0.0 {
            return Err(Error::NonPositiveEntry { index: i, value: 0.0 });
        }
    }
    let out = DividedDifferenceMatrix::build(
        alpha.len(),
        DividedDifferenceKind::XiSigmaAlpha,
        |i, j| Ok((alpha[i] + alpha[j]) / (alpha[i].abs() + alpha[j].abs())),
    )?;
    debug_assert!(out.entries.iter().all(|&v| v.abs() <= 1.0));
    Ok(out)
}
