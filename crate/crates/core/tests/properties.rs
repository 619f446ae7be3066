//! Cross-module properties checked against direct Kronecker-product and
//! eigensolver computations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sepkit_core::decomposition::{all_factors_pure, recombine, verify, FACTOR_TOL};
use sepkit_core::density::{
    partial_transpose, ph_all_cuts, random_correlation_only, random_mixed, random_separable, validate,
};
use sepkit_core::linalg::{hermitian_eigenvalues, kron_all, ComplexMatrix};
use sepkit_core::pauli::{g_extract, g_reconstruct, hs2_decompose, hs2_reconstruct, pauli, GTensor};
use sepkit_core::sep2_correlation::{classify_corr, decompose_corr, diagonalize_t, spectra_from_t};
use sepkit_core::sep3_correlation::{classify3, MinimizeConfig};
use sepkit_core::Verdict;

/// `rho_{ij,kl} -> rho_{kj,il}` written out index by index for two qubits.
fn naive_pt_a(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * k + j, 2 * i + l)] = m[(2 * i + j, 2 * k + l)];
                }
            }
        }
    }
    out
}

/// `sum_P c_P P / 2^n` assembled by explicit Kronecker products.
fn kron_sum(n: usize, terms: &[(Vec<usize>, f64)]) -> ComplexMatrix {
    let dim = 1 << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (labels, c) in terms {
        let ps: Vec<ComplexMatrix> = labels.iter().map(|&k| pauli(k)).collect();
        m.add_scaled(&kron_all(ps.iter()), *c / dim as f64);
    }
    m
}

fn sorted_eigs(m: &ComplexMatrix) -> Vec<f64> {
    hermitian_eigenvalues(m).unwrap()
}

#[test]
fn partial_transpose_matches_index_formula_and_is_involution() {
    for seed in 0..200 {
        let rho = random_mixed(2, 3, seed).unwrap();
        let pt = partial_transpose(&rho, 0).unwrap();
        assert_eq!(pt, naive_pt_a(rho.matrix()));
        let rho3 = random_mixed(3, 8, seed).unwrap();
        for k in 0..3 {
            let once = partial_transpose(&rho3, k).unwrap();
            assert!((once.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            let v = validate(&once, 3);
            // Hermiticity and trace survive; positivity may not.
            assert!(v.is_ok() || matches!(v, Err(sepkit_core::Error::NotPositive { .. })));
            let twice = sepkit_core::density::partial_transpose_matrix(&once, 3, k).unwrap();
            assert_eq!(&twice, rho3.matrix());
        }
    }
}

#[test]
fn three_body_states_have_isospectral_partial_transposes() {
    // The PH test can never fire on a three-qubit state with only
    // three-body correlations.
    for seed in 0..300 {
        let rho = random_correlation_only(3, 0.15, seed).unwrap();
        let e = sorted_eigs(rho.matrix());
        for k in 0..3 {
            let pt = sorted_eigs(&partial_transpose(&rho, k).unwrap());
            let d = e.iter().zip(&pt).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(d < 1e-12, "seed {seed} cut {k}: {d}");
        }
    }
}

#[test]
fn three_body_spectrum_is_symmetric_about_one_eighth() {
    for seed in 0..100 {
        let rho = random_correlation_only(3, 0.15, seed).unwrap();
        let e = sorted_eigs(rho.matrix());
        for i in 0..8 {
            assert!((e[i] + e[7 - i] - 0.25).abs() < 1e-12);
        }
    }
}

#[test]
fn hs2_reconstruction_matches_kronecker_sum() {
    for seed in 0..200 {
        let rho = random_mixed(2, 4, seed).unwrap();
        let hs = hs2_decompose(&rho);
        let mut terms = vec![(vec![0, 0], 1.0)];
        for i in 0..3 {
            terms.push((vec![i + 1, 0], hs.r[i]));
            terms.push((vec![0, i + 1], hs.s[i]));
            for j in 0..3 {
                terms.push((vec![i + 1, j + 1], hs.t[i][j]));
            }
        }
        let direct = kron_sum(2, &terms);
        assert!(direct.max_abs_diff(rho.matrix()) < 1e-14);
        assert!(hs2_reconstruct(&hs).max_abs_diff(rho.matrix()) < 1e-14);
    }
}

#[test]
fn g_tensor_reconstruction_matches_kronecker_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let g = GTensor(std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-0.1..0.1)))));
        let mut terms = vec![(vec![0, 0, 0], 1.0)];
        for ((a, b, c), v) in g.iter() {
            terms.push((vec![a + 1, b + 1, c + 1], v));
        }
        let direct = kron_sum(3, &terms);
        assert!(direct.max_abs_diff(&g_reconstruct(&g)) < 1e-15);
        let (back, residual) = g_extract(&validate(&direct, 3).unwrap());
        assert!(residual < 1e-15);
        assert!(back.max_abs_diff(&g) < 1e-15);
    }
}

#[test]
fn closed_form_spectra_match_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let t = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let m = kron_sum(2, &[(vec![0, 0], 1.0), (vec![1, 1], t[0]), (vec![2, 2], t[1]), (vec![3, 3], t[2])]);
        let s = spectra_from_t(&t);
        let mut closed = s.lam_rho.to_vec();
        closed.sort_by(f64::total_cmp);
        let numeric = sorted_eigs(&m);
        for (a, b) in closed.iter().zip(&numeric) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn random_separable_states_are_ppt_and_reproduced() {
    for n in 2..=3 {
        for seed in 0..200 {
            let (rho, d) = random_separable(n, 5, seed).unwrap();
            assert!(ph_all_cuts(&rho).unwrap().iter().all(|r| !r.witnesses_entanglement()));
            assert!(verify(&d, &rho, 1e-12).unwrap().passed);
            assert!(all_factors_pure(&d, FACTOR_TOL));
        }
    }
}

#[test]
fn corr2_certificates_are_sound() {
    let mut certified = 0;
    for seed in 0..2000 {
        let rho = random_correlation_only(2, 0.6, seed).unwrap();
        let d = diagonalize_t(&hs2_decompose(&rho)).unwrap();
        if classify_corr(&d.t).unwrap().verdict != Verdict::Separable {
            continue;
        }
        let cert = decompose_corr(&d).unwrap();
        let pure = cert.to_pure_ensemble();
        assert!(all_factors_pure(&pure, FACTOR_TOL));
        assert!(recombine(&pure).max_abs_diff(rho.matrix()) < 1e-12);
        assert!(verify(&cert, &rho, 1e-12).unwrap().passed);
        certified += 1;
    }
    assert!(certified > 400, "{certified}");
}

#[test]
fn corr3_separable_class_is_certified_and_sound() {
    let cfg = MinimizeConfig {
        restarts: 4,
        max_iters: 500,
        ..MinimizeConfig::default()
    };
    let mut counts = [0usize; 3];
    for seed in 0..300 {
        let rho = random_correlation_only(3, 0.1, seed).unwrap();
        let (g, _) = g_extract(&rho);
        let c = classify3(&g, &MinimizeConfig { seed, ..cfg }).unwrap();
        match c.verdict {
            Verdict::Separable => {
                counts[0] += 1;
                let cert = c.certificate.unwrap();
                assert!(verify(&cert, &rho, 1e-12).unwrap().passed);
                assert!(all_factors_pure(&cert.to_pure_ensemble(), FACTOR_TOL));
            }
            Verdict::Entangled => counts[1] += 1,
            Verdict::Indeterminate => {
                counts[2] += 1;
                assert!(c.form_after().unwrap() > 1.0);
            }
        }
        if let Some(m) = c.minimization {
            assert!(m.value <= m.initial_value);
        }
    }
    assert!(counts[0] > 0 && counts[2] > 0 && counts[1] == 0, "{counts:?}");
}
