//! First-order perturbation approximations for matrix powers and the
//! matrix modulus, together with the machinery to verify their
//! convergence orders empirically.
//!
//! The classical Daleckii-Krein theorem linearizes `f(A + E)` around a
//! Hermitian `A` whenever `f` is smooth on the spectrum. That fails for
//! fractional powers of a singular positive semi-definite matrix and
//! for the modulus of a singular matrix. This crate implements the
//! non-linear first-order replacements for those singular cases — the
//! non-linearity is confined to a fractional power of one Schur
//! complement block (or one modulus of a kernel block) — along with:
//!
//! * the exact eigendecomposition / SVD oracles the approximations are
//!   measured against ([`factor`]),
//! * the Schur-complement and singular-basis block splits ([`split`]),
//! * the divided-difference matrices carrying the formulas ([`loewner`]),
//! * spectral projectors, exact and first-order ([`projectors`]),
//! * a seeded verification harness fitting log-log error slopes against
//!   the claimed orders ([`verify`]).

pub mod error;
pub mod factor;
pub mod first_order;
pub mod loewner;
pub mod matrix;
pub mod projectors;
pub mod split;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use factor::{
    eigh, matrix_modulus, matrix_power, numerical_rank, svd, SpectralDecomposition,
    SvdDecomposition,
};
pub use first_order::{
    dk_approx, dk_first_order_term, dk_fractional_power, modulus_approx,
    modulus_approx_invertible, modulus_approx_psd, modulus_first_order, power_approx,
    power_approx_s, power_order, ExpectedOrder, ModulusApproxResult, PowerApproxResult,
};
pub use loewner::{
    divided_difference, power_dd_one, sqrt_divided_difference, xi_sigma_alpha, xi_sigma_plus,
    DividedDifferenceKind, DividedDifferenceMatrix,
};
pub use matrix::{frobenius_norm, hadamard, spectral_norm, ComplexMatrix, HermitianMatrix, C64};
pub use projectors::{projector_first_order, spectral_projectors, ProjectorPair};
pub use split::{
    modulus_split, psd_iff_schur_complement, schur_reassemble, schur_split, split_rotated,
    ModulusSplit, SchurSplit,
};
pub use tol::Tolerances;
pub use verify::{
    default_scales, error_order_fit, fit_loglog_slope, holder_improvement_check, random_instance,
    random_psd_pair, run_campaign, trial_seed, validate_scales, wihler_check, HolderImprovementReport, Instance,
    InstanceSpec, OrderFitReport, PerturbationKind, Problem, WihlerCheck, DEFAULT_SLOPE_MARGIN,
};
