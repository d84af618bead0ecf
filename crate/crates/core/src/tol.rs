use serde::Serialize;

/// Tolerance bundle threaded through every check in the crate.
///
/// The defaults sit well above double-precision rounding noise for the
/// dimensions this crate targets (n ≤ 64) while staying far below any
/// quantity of mathematical interest. All of them can be overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Allowed relative deviation from exact Hermitian symmetry.
    pub hermitian_tol: f64,
    /// Allowed deviation of `U U*` from the identity.
    pub unitary_tol: f64,
    /// Allowed relative reconstruction residual of a factorization.
    pub recon_tol: f64,
    /// How far below zero an eigenvalue may sit and still count as zero.
    pub psd_tol: f64,
    /// Relative threshold deciding which eigenvalues belong to the kernel.
    pub rank_tol: f64,
    /// Relative threshold deciding when two eigenvalues are equal for
    /// divided differences.
    pub pair_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian_tol: 1e-10,
            unitary_tol: 1e-10,
            recon_tol: 1e-10,
            psd_tol: 1e-10,
            rank_tol: 1e-8,
            pair_tol: 1e-12,
        }
    }
}

impl Tolerances {
    /// Scale-adjusted PSD threshold: eigenvalues above `-psd_floor(scale)`
    /// are treated as nonnegative.
    pub(crate) fn psd_floor(&self, scale: f64) -> f64 {
        self.psd_tol * (1.0 + scale)
    }
}
