//! Cross-module invariants checked on seeded random sweeps.

use matperturb::matrix::CMat;
use matperturb::*;
use nalgebra::Complex;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn tols() -> Tolerances {
    Tolerances::default()
}

fn c(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let g = gaussian(rng, n, n);
    let h = CMat::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * c(0.5));
    HermitianMatrix::new(ComplexMatrix::from_dmatrix(h).unwrap(), 1e-10).unwrap()
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    gaussian(rng, n, n).qr().q()
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> HermitianMatrix {
    let g = gaussian(rng, n, rank);
    let m = &g * g.adjoint();
    let h = CMat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * c(0.5));
    HermitianMatrix::new(ComplexMatrix::from_dmatrix(h).unwrap(), 1e-10).unwrap()
}

fn snorm(m: &CMat) -> f64 {
    spectral_norm(&ComplexMatrix::from_dmatrix(m.clone()).unwrap())
}

#[test]
fn functional_calculus_identity_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for n in [1usize, 2, 5, 9] {
        let a = random_hermitian(&mut rng, n);
        let dec = eigh(&a, &tols()).unwrap();
        let back = dec.apply(|t| t).unwrap();
        let resid = snorm(&(back.matrix() - a.matrix()));
        let bound = 1e-12 * (1.0 + snorm(a.matrix()));
        assert!(resid <= bound, "n={n}: {resid:.3e} > {bound:.3e}");
    }
}

#[test]
fn square_root_squares_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for n in [1usize, 3, 8, 16] {
        let a = random_psd(&mut rng, n, n.max(1) - n / 3);
        let root = matrix_power(&a, 0.5, &tols()).unwrap();
        let squared = root.matrix() * root.matrix();
        let resid = snorm(&(squared - a.matrix()));
        let bound = 1e-10 * (1.0 + snorm(a.matrix()));
        assert!(resid <= bound, "n={n}: {resid:.3e} > {bound:.3e}");
    }
}

#[test]
fn modulus_is_positive_semidefinite() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for n in [1usize, 2, 4, 7] {
        let x = ComplexMatrix::from_dmatrix(gaussian(&mut rng, n, n)).unwrap();
        let m = matrix_modulus(&x).unwrap();
        let dec = eigh(&m, &tols()).unwrap();
        let min = dec.eigenvalues().last().copied().unwrap();
        let bound = -1e-12 * (1.0 + spectral_norm(&x));
        assert!(min >= bound, "n={n}: min eigenvalue {min:.3e}");
    }
}

#[test]
fn spectral_norm_is_unitarily_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..20 {
        let n = 5;
        let m = gaussian(&mut rng, n, n);
        let u = random_unitary(&mut rng, n);
        let v = random_unitary(&mut rng, n);
        let rotated = &u * &m * &v;
        let a = snorm(&m);
        let b = snorm(&rotated);
        assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }
}

/// 500 random (alpha, E, l) instances: split then reassemble is the
/// identity to 1e-13 relative.
#[test]
fn schur_split_roundtrip_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let tol = tols();
    for trial in 0..500 {
        let n = 1 + (rng.random::<u32>() % 12) as usize;
        let l = (rng.random::<u32>() % (n as u32 + 1)) as usize;
        let mut alpha: Vec<f64> = (0..l).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
        alpha.sort_by(|a, b| b.partial_cmp(a).unwrap());
        alpha.extend(std::iter::repeat_n(0.0, n - l));

        let e_raw = random_hermitian(&mut rng, n);
        let scale = 0.1 / (1.0 + e_raw.max_abs());
        let e = HermitianMatrix::new(
            ComplexMatrix::from_dmatrix(e_raw.matrix() * c(scale)).unwrap(),
            1e-10,
        )
        .unwrap();

        let split = schur_split(&alpha, &e, l, &tol).unwrap();
        assert_eq!(split.l() + split.m(), n);
        let back = schur_reassemble(&split).unwrap();
        let resid = snorm(&(back.matrix() - e.matrix()));
        let bound = 1e-13 * (1.0 + snorm(e.matrix()));
        assert!(resid <= bound, "trial {trial}: {resid:.3e} > {bound:.3e}");
    }
}

/// 500 instances with the shifted block positive definite: the whole
/// matrix is PSD exactly when the Schur complement is. Instances whose
/// minimum eigenvalue sits within ten PSD tolerances of zero are
/// excluded as ties.
#[test]
fn schur_psd_equivalence_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let tol = tols();
    let mut tested = 0usize;
    let mut positives = 0usize;
    for _ in 0..500 {
        let n = 2 + (rng.random::<u32>() % 7) as usize;
        let l = 1 + (rng.random::<u32>() % (n as u32 - 1)) as usize;
        let mut alpha: Vec<f64> = (0..l).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
        alpha.sort_by(|a, b| b.partial_cmp(a).unwrap());
        alpha.extend(std::iter::repeat_n(0.0, n - l));

        let e_raw = random_hermitian(&mut rng, n);
        // keep the shifted block positive definite but let the kernel
        // side wander across the PSD boundary
        let scale = 0.35 / (1.0 + spectral_norm(e_raw.as_complex()));
        let e = HermitianMatrix::new(
            ComplexMatrix::from_dmatrix(e_raw.matrix() * c(scale)).unwrap(),
            1e-10,
        )
        .unwrap();

        let mut perturbed = e.matrix().clone();
        for (i, &a) in alpha.iter().enumerate() {
            perturbed[(i, i)] += c(a);
        }
        let whole = HermitianMatrix::new(
            ComplexMatrix::from_dmatrix(perturbed).unwrap(),
            1e-10,
        )
        .unwrap();
        let dec = eigh(&whole, &tol).unwrap();
        let min_eig = dec.eigenvalues().last().copied().unwrap();
        let band = 10.0 * tol.psd_tol * alpha[0].max(1.0);
        if min_eig.abs() < band {
            continue; // tie
        }

        let (whole_psd, schur_psd) = match psd_iff_schur_complement(&alpha, &e, l, &tol) {
            Ok(pair) => pair,
            Err(Error::NotPositiveDefinite { .. }) => continue,
            Err(other) => panic!("unexpected error {other}"),
        };
        assert_eq!(
            whole_psd, schur_psd,
            "disagreement at min eigenvalue {min_eig:.3e}"
        );
        tested += 1;
        if whole_psd {
            positives += 1;
        }
    }
    assert!(tested >= 400, "only {tested} instances outside the tie band");
    assert!(
        positives > 20 && positives < tested - 20,
        "sweep is degenerate: {positives}/{tested} positive"
    );
}

#[test]
fn modulus_split_blocks_reassemble_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let tol = tols();
    for _ in 0..100 {
        let n = 1 + (rng.random::<u32>() % 8) as usize;
        let rank = (rng.random::<u32>() % (n as u32 + 1)) as usize;
        let u = random_unitary(&mut rng, n);
        let v = random_unitary(&mut rng, n);
        let mut d = CMat::zeros(n, n);
        for i in 0..rank {
            d[(i, i)] = c(0.5 + rng.random::<f64>());
        }
        // enforce descending order
        let mut diag: Vec<f64> = (0..n).map(|i| d[(i, i)].re).collect();
        diag.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for i in 0..n {
            d[(i, i)] = c(diag[i]);
        }
        let x = ComplexMatrix::from_dmatrix(&u * &d * v.adjoint()).unwrap();
        let z = ComplexMatrix::from_dmatrix(gaussian(&mut rng, n, n)).unwrap();
        let (dec, split) = modulus_split(&x, &z, &tol).unwrap();
        assert_eq!(split.l() + split.m(), n);
        let rotated = dec.left().adjoint() * z.matrix() * dec.right();
        assert_eq!(split.reassemble(), rotated);
    }
}

#[test]
fn dk_term_is_linear_in_the_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let tol = tols();
    let a = random_psd(&mut rng, 5, 5);
    let dec = eigh(&a, &tol).unwrap();
    let f = |t: f64| (1.0 + t).ln();
    let fp = |t: f64| 1.0 / (1.0 + t);
    for _ in 0..20 {
        let e1 = random_hermitian(&mut rng, 5);
        let e2 = random_hermitian(&mut rng, 5);
        let (x, y) = (rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
        let combo = HermitianMatrix::new(
            ComplexMatrix::from_dmatrix(e1.matrix() * c(x) + e2.matrix() * c(y)).unwrap(),
            1e-10,
        )
        .unwrap();
        let lhs = dk_first_order_term(&dec, &combo, f, fp, &tol).unwrap();
        let t1 = dk_first_order_term(&dec, &e1, f, fp, &tol).unwrap();
        let t2 = dk_first_order_term(&dec, &e2, f, fp, &tol).unwrap();
        let rhs = t1.matrix() * c(x) + t2.matrix() * c(y);
        let resid = snorm(&(lhs.matrix() - &rhs));
        assert!(resid <= 1e-12 * (1.0 + snorm(&rhs)));
    }
}

/// With no kernel the singular-case formula collapses to the
/// Daleckii-Krein approximation.
#[test]
fn power_approx_reduces_to_dk_on_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let tol = tols();
    for p in [1.5, 2.0, 2.5] {
        // shift keeps the spectrum clear of zero: the no-kernel regime
        let a = {
            let g = random_psd(&mut rng, 5, 5);
            let shifted = g.matrix() + CMat::identity(5, 5) * c(0.5);
            HermitianMatrix::new(ComplexMatrix::from_dmatrix(shifted).unwrap(), 1e-10).unwrap()
        };
        let dec = eigh(&a, &tol).unwrap();
        let e_raw = random_hermitian(&mut rng, 5);
        let scale = 0.05 / spectral_norm(e_raw.as_complex());
        let e = HermitianMatrix::new(
            ComplexMatrix::from_dmatrix(e_raw.matrix() * c(scale)).unwrap(),
            1e-10,
        )
        .unwrap();
        let s = 1.0 / p;
        let nonlinear = power_approx(&dec, &e, p, &tol).unwrap();
        let dk = dk_approx(&dec, &e, |t: f64| t.powf(s), |t: f64| s * t.powf(s - 1.0), &tol)
            .unwrap();
        let resid = snorm(&(nonlinear.approximation.matrix() - dk.matrix()));
        assert!(resid <= 1e-12 * (1.0 + dk.max_abs()), "p={p}: {resid:.3e}");
    }
}

/// Scaling the off-kernel blocks while holding the Schur complement
/// fixed scales the correction linearly; scaling the complement alone
/// moves the kernel block by the fractional power of the factor.
#[test]
fn nonlinearity_is_confined_to_the_schur_block() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let tol = tols();
    let (l, m, n) = (3usize, 2usize, 5usize);
    let p = 2.0;
    let alpha: Vec<f64> = {
        let mut a: Vec<f64> = (0..l).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
        a.sort_by(|x, y| y.partial_cmp(x).unwrap());
        a.extend([0.0, 0.0]);
        a
    };
    let a_mat = HermitianMatrix::diagonal(&alpha);
    let dec = eigh(&a_mat, &tol).unwrap();

    let b0 = {
        let h = random_hermitian(&mut rng, l);
        let s = 0.02 / h.max_abs();
        ComplexMatrix::from_dmatrix(h.matrix() * c(s)).unwrap()
    };
    let c0 = ComplexMatrix::from_dmatrix(gaussian(&mut rng, l, m) * c(0.02)).unwrap();
    let d0 = {
        let g = gaussian(&mut rng, m, m);
        let gram = g.adjoint() * &g;
        ComplexMatrix::from_dmatrix(gram * c(0.02)).unwrap()
    };

    // assemble E with prescribed blocks (B, C, D) through the inverse split
    let assemble = |bc_scale: f64, d_scale: f64| -> HermitianMatrix {
        let mut shifted = b0.matrix() * c(bc_scale);
        for i in 0..l {
            shifted[(i, i)] += c(alpha[i]);
        }
        let cmat = c0.matrix() * c(bc_scale);
        let y = shifted.lu().solve(&cmat).unwrap();
        let e22 = cmat.adjoint() * y + d0.matrix() * c(d_scale);
        let mut full = CMat::zeros(n, n);
        full.view_mut((0, 0), (l, l))
            .copy_from(&(b0.matrix() * c(bc_scale)));
        full.view_mut((0, l), (l, m)).copy_from(&cmat);
        full.view_mut((l, 0), (m, l)).copy_from(&cmat.adjoint());
        full.view_mut((l, l), (m, m)).copy_from(&e22);
        HermitianMatrix::new(ComplexMatrix::from_dmatrix(full).unwrap(), 1e-10).unwrap()
    };

    let base = power_approx(&dec, &assemble(1.0, 1.0), p, &tol).unwrap();
    let scaled_bc = power_approx(&dec, &assemble(0.25, 1.0), p, &tol).unwrap();

    // off-kernel blocks of the correction scale by exactly the factor
    let t_base = base.first_order_term.matrix();
    let t_bc = scaled_bc.first_order_term.matrix();
    for i in 0..n {
        for j in 0..n {
            if i < l || j < l {
                let expect = t_base[(i, j)] * c(0.25);
                assert!((t_bc[(i, j)] - expect).norm() <= 1e-12);
            } else {
                // kernel block untouched by the off-kernel scaling
                assert!((t_bc[(i, j)] - t_base[(i, j)]).norm() <= 1e-12);
            }
        }
    }

    // scaling D alone moves the kernel block by the fractional power
    let scaled_d = power_approx(&dec, &assemble(1.0, 0.25), p, &tol).unwrap();
    let t_d = scaled_d.first_order_term.matrix();
    let factor = c(0.25f64.powf(1.0 / p));
    for i in l..n {
        for j in l..n {
            let expect = t_base[(i, j)] * factor;
            assert!((t_d[(i, j)] - expect).norm() <= 1e-12);
        }
    }
}

/// The modulus correction never reads the lower-left block of the
/// rotated perturbation: identical remaining blocks give bitwise
/// identical output.
#[test]
fn modulus_term_is_independent_of_z21() {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let tol = tols();
    for _ in 0..50 {
        let (l, m, n) = (3usize, 2usize, 5usize);
        let u = random_unitary(&mut rng, n);
        let v = random_unitary(&mut rng, n);
        let mut sig: Vec<f64> = (0..l).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
        sig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut d = CMat::zeros(n, n);
        for i in 0..l {
            d[(i, i)] = c(sig[i]);
        }
        let x = ComplexMatrix::from_dmatrix(&u * &d * v.adjoint()).unwrap();
        let z = ComplexMatrix::from_dmatrix(gaussian(&mut rng, n, n) * c(0.01)).unwrap();

        let (svd_dec, split) = modulus_split(&x, &z, &tol).unwrap();
        let other = ModulusSplit::from_blocks(
            split.sigma_plus().to_vec(),
            split.z11().clone(),
            split.z12().clone(),
            gaussian(&mut rng, m, l), // a completely different z21
            split.z22().clone(),
        )
        .unwrap();

        let r1 = modulus_first_order(&svd_dec, &split).unwrap();
        let r2 = modulus_first_order(&svd_dec, &other).unwrap();
        assert_eq!(r1.approximation.matrix(), r2.approximation.matrix());
        assert_eq!(r1.first_order_term.matrix(), r2.first_order_term.matrix());
    }
}

/// Full-path variant: perturbations assembled from block data with
/// different lower-left blocks give outputs agreeing to machine
/// precision once rotated through the recomputed factorization.
#[test]
fn modulus_full_path_z21_independence() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let tol = tols();
    for _ in 0..20 {
        let (l, m, n) = (3usize, 3usize, 6usize);
        let u = random_unitary(&mut rng, n);
        let v = random_unitary(&mut rng, n);
        let mut sig: Vec<f64> = (0..l).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
        sig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut dmat = CMat::zeros(n, n);
        for i in 0..l {
            dmat[(i, i)] = c(sig[i]);
        }
        let x = ComplexMatrix::from_dmatrix(&u * &dmat * v.adjoint()).unwrap();

        let mut zt = gaussian(&mut rng, n, n) * c(0.01);
        let z = ComplexMatrix::from_dmatrix(&u * &zt * v.adjoint()).unwrap();
        // replace the lower-left block and rebuild
        let fresh = gaussian(&mut rng, m, l) * c(0.01);
        zt.view_mut((l, 0), (m, l)).copy_from(&fresh);
        let z_alt = ComplexMatrix::from_dmatrix(&u * &zt * v.adjoint()).unwrap();

        let r1 = modulus_approx(&x, &z, &tol).unwrap();
        let r2 = modulus_approx(&x, &z_alt, &tol).unwrap();
        let resid = snorm(&(r1.approximation.matrix() - r2.approximation.matrix()));
        assert!(resid <= 1e-13 * (1.0 + r1.approximation.max_abs()));
    }
}

#[test]
fn approximations_are_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    let tol = tols();
    let hermitian_defect = |m: &CMat| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    };

    let spec = InstanceSpec {
        n: 6,
        rank: 3,
        spectrum_range: (0.5, 2.0),
        kind: PerturbationKind::HermitianPsdCompatible,
        seed: 7,
    };
    let inst = random_instance(&spec, &tol).unwrap();
    let a = HermitianMatrix::new(inst.base.clone(), 1e-10).unwrap();
    let dec = eigh(&a, &tol).unwrap();
    let e = HermitianMatrix::new(
        ComplexMatrix::from_dmatrix(inst.direction.matrix() * c(0.05)).unwrap(),
        1e-10,
    )
    .unwrap();
    let r = power_approx(&dec, &e, 2.0, &tol).unwrap();
    assert!(hermitian_defect(r.approximation.matrix()) <= 1e-12);

    let x = ComplexMatrix::from_dmatrix(gaussian(&mut rng, 5, 5)).unwrap();
    let z = ComplexMatrix::from_dmatrix(gaussian(&mut rng, 5, 5) * c(0.01)).unwrap();
    let r = modulus_approx(&x, &z, &tol).unwrap();
    assert!(hermitian_defect(r.approximation.matrix()) <= 1e-12);
}

#[test]
fn exact_projector_invariants_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let tol = tols();
    for trial in 0..200 {
        let n = 2 + (rng.random::<u32>() % 7) as usize;
        let l = 1 + (rng.random::<u32>() % (n as u32 - 1)) as usize;
        let mut alpha: Vec<f64> = (0..l).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
        alpha.sort_by(|a, b| b.partial_cmp(a).unwrap());
        alpha.extend(std::iter::repeat_n(0.0, n - l));

        let e_raw = random_hermitian(&mut rng, n);
        let scale = 0.05 / spectral_norm(e_raw.as_complex());
        let e = HermitianMatrix::new(
            ComplexMatrix::from_dmatrix(e_raw.matrix() * c(scale)).unwrap(),
            1e-10,
        )
        .unwrap();

        let pair = spectral_projectors(&alpha, &e, l, &tol).unwrap();
        let (sum_resid, idem_resid) = pair.residuals();
        assert!(sum_resid <= 1e-12, "trial {trial}: sum {sum_resid:.3e}");
        assert!(idem_resid <= 1e-10, "trial {trial}: idem {idem_resid:.3e}");
    }
}

/// All value types are immutable after construction and cross thread
/// boundaries freely.
#[test]
fn value_types_are_send_and_sync() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<ComplexMatrix>();
    assert_send_sync::<HermitianMatrix>();
    assert_send_sync::<SpectralDecomposition>();
    assert_send_sync::<SvdDecomposition>();
    assert_send_sync::<SchurSplit>();
    assert_send_sync::<ModulusSplit>();
    assert_send_sync::<DividedDifferenceMatrix>();
    assert_send_sync::<ProjectorPair>();
    assert_send_sync::<OrderFitReport>();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Entries of the sign-aware modulus kernel never exceed one.
    #[test]
    fn xi_sigma_alpha_entries_bounded(values in prop::collection::vec(-10.0f64..10.0, 1..8)) {
        let alpha: Vec<f64> = values
            .into_iter()
            .map(|v| if v.abs() < 1e-3 { v.signum().max(0.5) * 1e-3 } else { v })
            .collect();
        let xi = xi_sigma_alpha(&alpha).unwrap();
        for i in 0..alpha.len() {
            for j in 0..alpha.len() {
                prop_assert!(xi.get(i, j).abs() <= 1.0);
            }
        }
    }

    /// The power divided difference agrees with the generic quotient
    /// form away from zero pairs.
    #[test]
    fn power_dd_agrees_with_quotient(
        values in prop::collection::vec(0.01f64..5.0, 2..8),
        s in prop::sample::select(vec![0.5, 1.0/3.0, 0.4, 1.5, 2.0]),
    ) {
        let tol = Tolerances::default();
        let a = power_dd_one(s, &values, &tol).unwrap();
        let b = divided_difference(|t| t.powf(s), |t| s * t.powf(s - 1.0), &values, &tol).unwrap();
        for i in 0..values.len() {
            for j in 0..values.len() {
                let (x, y) = (a.get(i, j), b.get(i, j));
                prop_assert!(((x - y) / x.abs().max(1e-300)).abs() <= 1e-10);
            }
        }
    }

    /// Hadamard with the all-ones matrix is the identity operation.
    #[test]
    fn hadamard_with_ones(entries in prop::collection::vec(-5.0f64..5.0, 9)) {
        let m = ComplexMatrix::from_real(3, 3, &entries).unwrap();
        let ones = ComplexMatrix::from_real(3, 3, &[1.0; 9]).unwrap();
        prop_assert_eq!(hadamard(&m, &ones).unwrap(), m);
    }
}
