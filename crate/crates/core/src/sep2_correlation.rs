//! Two-qubit states with vanishing local Bloch vectors.
//!
//! Such a state is `(I + sum t_mn sigma_m (x) sigma_n) / 4`. Local rotations
//! bring `t` to diagonal form, after which the spectrum, the separability
//! test and an explicit product ensemble all have closed forms.

use crate::decomposition::SeparableDecomposition;
use crate::density::{ph_test, validate, PSD_TOL};
use crate::error::{Error, Result};
use crate::linalg::{real, svd3, Mat3, Rot3, Vec3};
use crate::pauli::{hs2_reconstruct, Hs2};
use crate::verdict::Verdict;

/// Tolerance on the local Bloch vectors for a state to count as correlation-only.
pub const CORRELATION_ONLY_TOL: f64 = 1e-10;
/// Slack on `sum |t_i| <= 1` and on `lambda_max <= 1/2`.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Criteria that disagree with margins below this are treated as sitting on the boundary.
const BOUNDARY_BAND: f64 = 1e-9;

/// `o_a^T t o_b = diag(t)` with `t[0] >= t[1] >= |t[2]|` and `t[0], t[1] >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalCorrelation {
    pub t: Vec3,
    pub o_a: Rot3,
    pub o_b: Rot3,
}

impl DiagonalCorrelation {
    /// An already-diagonal correlation matrix, in whatever order and signs given.
    pub fn from_diagonal(t: Vec3) -> Self {
        DiagonalCorrelation {
            t,
            o_a: Rot3::IDENTITY,
            o_b: Rot3::IDENTITY,
        }
    }

    pub fn form(&self) -> f64 {
        separability_form(&self.t)
    }
}

pub fn separability_form(t: &Vec3) -> f64 {
    t.iter().map(|x| x.abs()).sum()
}

pub fn diagonalize_t(hs: &Hs2) -> Result<DiagonalCorrelation> {
    let r_norm = real::norm(&hs.r);
    let s_norm = real::norm(&hs.s);
    if r_norm > CORRELATION_ONLY_TOL || s_norm > CORRELATION_ONLY_TOL {
        return Err(Error::NotCorrelationOnly { r_norm, s_norm });
    }
    Ok(diagonalize_matrix(&hs.t))
}

/// Proper-rotation SVD of a correlation matrix, in canonical order.
pub fn diagonalize_matrix(t: &Mat3) -> DiagonalCorrelation {
    let svd = svd3(t);
    DiagonalCorrelation {
        t: svd.d,
        o_a: svd.u,
        o_b: svd.v,
    }
}

/// Eigenvalues of the diagonal-correlation state and of its partial transpose,
/// each in the fixed labeled order below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectra {
    pub lam_rho: [f64; 4],
    pub lam_pt: [f64; 4],
}

impl Spectra {
    pub fn max_rho(&self) -> f64 {
        self.lam_rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_rho(&self) -> f64 {
        self.lam_rho.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn min_pt(&self) -> f64 {
        self.lam_pt.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

pub fn spectra_from_t(t: &Vec3) -> Spectra {
    let [t1, t2, t3] = *t;
    Spectra {
        lam_rho: [
            (1.0 - t1 - t2 - t3) / 4.0,
            (1.0 + t1 + t2 - t3) / 4.0,
            (1.0 + t1 - t2 + t3) / 4.0,
            (1.0 - t1 + t2 + t3) / 4.0,
        ],
        lam_pt: [
            (1.0 + t1 - t2 - t3) / 4.0,
            (1.0 - t1 + t2 - t3) / 4.0,
            (1.0 - t1 - t2 + t3) / 4.0,
            (1.0 + t1 + t2 + t3) / 4.0,
        ],
    }
}

/// Recovers `t` from a labeled spectrum; inverse of [`spectra_from_t`].
pub fn t_from_spectrum(lam: &[f64; 4]) -> Result<Vec3> {
    let sum: f64 = lam.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::BadSpectrum { sum });
    }
    Ok([
        2.0 * lam[1] + 2.0 * lam[2] - 1.0,
        2.0 * lam[1] + 2.0 * lam[3] - 1.0,
        2.0 * lam[2] + 2.0 * lam[3] - 1.0,
    ])
}

/// `lam_pt[i] = 1/2 - lam_rho[PT_PAIRING[i]]` in the labeling of [`spectra_from_t`].
pub const PT_PAIRING: [usize; 4] = [3, 2, 1, 0];

pub fn pt_pairing_check(s: &Spectra) -> f64 {
    (0..4)
        .map(|i| (s.lam_pt[i] - (0.5 - s.lam_rho[PT_PAIRING[i]])).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrClassification {
    pub verdict: Verdict,
    /// `sum |t_i|`.
    pub form: f64,
    pub max_lambda: f64,
    /// Smallest eigenvalue of the numerically computed partial transpose.
    pub min_pt_eigenvalue: f64,
}

/// Decides separability of the diagonal-correlation state `t` three ways
/// (`sum |t_i| <= 1`, `lambda_max <= 1/2`, positive partial transpose) and
/// insists that they agree.
pub fn classify_corr(t: &Vec3) -> Result<CorrClassification> {
    let spectra = spectra_from_t(t);
    let min_lambda = spectra.min_rho();
    if min_lambda < -PSD_TOL {
        return Err(Error::InvalidState {
            min_eigenvalue: min_lambda,
        });
    }
    let rho = validate(&hs2_reconstruct(&Hs2::diagonal(*t)), 2).map_err(|e| match e {
        Error::NotPositive { min_eigenvalue } => Error::InvalidState { min_eigenvalue },
        other => other,
    })?;
    let min_pt_eigenvalue = ph_test(&rho, 1)?.min_eigenvalue;
    let form = separability_form(t);
    let max_lambda = spectra.max_rho();

    let margins = [1.0 + BOUNDARY_TOL - form, 0.5 + BOUNDARY_TOL - max_lambda, min_pt_eigenvalue + PSD_TOL];
    let by_form = margins[0] >= 0.0;
    if margins.iter().any(|&m| (m >= 0.0) != by_form && m.abs() > BOUNDARY_BAND) {
        return Err(Error::InconsistentCriteria(format!(
            "sum|t| = {form}, lambda_max = {max_lambda}, min PT eigenvalue = {min_pt_eigenvalue}"
        )));
    }
    Ok(CorrClassification {
        verdict: if by_form { Verdict::Separable } else { Verdict::Entangled },
        form,
        max_lambda,
        min_pt_eigenvalue,
    })
}

/// Explicit product ensemble for a separable correlation-only state.
///
/// In the diagonal frame each `t_i` contributes the pair
/// `(I +- sigma_i)/2 (x) (I +- sign(t_i) sigma_i)/2` with weight `|t_i|/2`
/// each, and the identity term takes what is left. The factors are then
/// rotated back, so the ensemble reproduces the original state.
pub fn decompose_corr(d: &DiagonalCorrelation) -> Result<SeparableDecomposition> {
    let form = d.form();
    if form > 1.0 + BOUNDARY_TOL {
        return Err(Error::NotCertifiedSeparable { form });
    }
    let mut raw = Vec::with_capacity(7);
    for (i, &ti) in d.t.iter().enumerate() {
        if ti == 0.0 {
            continue;
        }
        let mut e = [0.0; 3];
        e[i] = 1.0;
        let f = e.map(|x| x * ti.signum());
        raw.push((ti.abs() / 2.0, vec![e, f]));
        raw.push((ti.abs() / 2.0, vec![e.map(|x| -x), f.map(|x| -x)]));
    }
    raw.push((1.0 - form, vec![[0.0; 3], [0.0; 3]]));
    let cert = SeparableDecomposition::from_bloch_terms(2, raw);
    if d.o_a == Rot3::IDENTITY && d.o_b == Rot3::IDENTITY {
        return Ok(cert);
    }
    Ok(cert.map_local(&[d.o_a.to_unitary(), d.o_b.to_unitary()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{all_factors_pure, verify, DEFAULT_RESIDUAL_TOL};
    use crate::density::partial_transpose_matrix;
    use crate::linalg::hermitian_eigenvalues;
    use crate::pauli::hs2_from_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    fn max_sorted_diff(a: &[f64], b: &[f64]) -> f64 {
        sorted(a.to_vec()).iter().zip(sorted(b.to_vec())).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn diagonalize_identity_case() {
        let hs = Hs2::diagonal([0.5, 0.3, 0.1]);
        let d = diagonalize_t(&hs).unwrap();
        assert_eq!(d.t, [0.5, 0.3, 0.1]);
        assert_eq!(d.o_a, Rot3::IDENTITY);
        assert_eq!(d.o_b, Rot3::IDENTITY);
    }

    #[test]
    fn diagonalize_recovers_planted_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let q1 = Rot3::random(&mut rng);
            let q2 = Rot3::random(&mut rng);
            let t = real::matmul(&real::matmul(q1.matrix(), &real::diag([0.5, 0.3, 0.1])), q2.transpose().matrix());
            let d = diagonalize_t(&Hs2::correlation_only(t)).unwrap();
            assert!(real::vec_max_abs_diff(&d.t, &[0.5, 0.3, 0.1]) < 1e-12);
            let core = real::matmul(&real::matmul(d.o_a.transpose().matrix(), &t), d.o_b.matrix());
            assert!(real::max_abs_diff(&core, &real::diag(d.t)) < 1e-12);
        }
    }

    #[test]
    fn bell_canonical_form() {
        let d = diagonalize_t(&Hs2::diagonal([1.0, -1.0, 1.0])).unwrap();
        assert!(real::vec_max_abs_diff(&d.t, &[1.0, 1.0, -1.0]) < 1e-15);
    }

    #[test]
    fn local_vectors_rejected() {
        let hs = Hs2 {
            r: [0.1, 0.0, 0.0],
            ..Hs2::default()
        };
        assert!(matches!(diagonalize_t(&hs), Err(Error::NotCorrelationOnly { .. })));
    }

    #[test]
    fn spectra_examples() {
        let s = spectra_from_t(&[0.0; 3]);
        assert_eq!(s.lam_rho, [0.25; 4]);
        assert_eq!(s.lam_pt, [0.25; 4]);
        let s = spectra_from_t(&[1.0, -1.0, 1.0]);
        assert_eq!(s.lam_rho, [0.0, 0.0, 1.0, 0.0]);
        assert_eq!(s.lam_pt, [0.5, -0.5, 0.5, 0.5]);
        let p = 0.2;
        let s = spectra_from_t(&[-p, -p, -p]);
        assert!(real::vec_max_abs_diff(&s.lam_rho, &[0.4, 0.2, 0.2, 0.2]) < 1e-15);
        assert!((s.min_pt() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn spectra_match_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let t: Vec3 = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let s = spectra_from_t(&t);
            let m = hs2_reconstruct(&Hs2::diagonal(t));
            assert!(max_sorted_diff(&s.lam_rho, &hermitian_eigenvalues(&m).unwrap()) < 1e-12);
            let pt = partial_transpose_matrix(&m, 2, 1).unwrap();
            assert!(max_sorted_diff(&s.lam_pt, &hermitian_eigenvalues(&pt).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn inversion_round_trip() {
        assert_eq!(t_from_spectrum(&[0.25; 4]).unwrap(), [0.0; 3]);
        let t = t_from_spectrum(&spectra_from_t(&[0.5, 0.3, 0.1]).lam_rho).unwrap();
        assert!(real::vec_max_abs_diff(&t, &[0.5, 0.3, 0.1]) < 1e-15);
        assert_eq!(t_from_spectrum(&[0.0, 0.0, 1.0, 0.0]).unwrap(), [1.0, -1.0, 1.0]);
        assert!(matches!(t_from_spectrum(&[0.5; 4]), Err(Error::BadSpectrum { .. })));
    }

    /// The alternative closed form `(1 - 2l2 - 2l3, 1 - 2l2 - 2l4, 2l3 + 2l4 - 1)`
    /// returns the image of `t` under flipping the signs of `t1` and `t2`, which
    /// leaves the spectrum invariant as a multiset.
    #[test]
    fn sign_flipped_inversion_is_two_flip_image() {
        let lam = [0.0, 0.0, 1.0, 0.0];
        let alt = [1.0 - 2.0 * lam[1] - 2.0 * lam[2], 1.0 - 2.0 * lam[1] - 2.0 * lam[3], 2.0 * lam[2] + 2.0 * lam[3] - 1.0];
        assert_eq!(alt, [-1.0, 1.0, 1.0]);
        let t = t_from_spectrum(&lam).unwrap();
        assert_eq!(alt, [-t[0], -t[1], t[2]]);
        let a = spectra_from_t(&alt);
        let b = spectra_from_t(&t);
        assert_eq!(max_sorted_diff(&a.lam_rho, &b.lam_rho), 0.0);
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pt_pairing_check(&spectra_from_t(&[0.0; 3])), 0.0);
        assert_eq!(pt_pairing_check(&spectra_from_t(&[1.0, -1.0, 1.0])), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let t: Vec3 = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            assert!(pt_pairing_check(&spectra_from_t(&t)) < 1e-13);
        }
    }

    #[test]
    fn sign_flip_dualities() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let t: Vec3 = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let s = spectra_from_t(&t);
            for i in 0..3 {
                let mut one = t;
                one[i] = -one[i];
                let f = spectra_from_t(&one);
                assert!(max_sorted_diff(&f.lam_rho, &s.lam_pt) < 1e-15);
                assert!(max_sorted_diff(&f.lam_pt, &s.lam_rho) < 1e-15);
                let mut two = t.map(|x| -x);
                two[i] = -two[i];
                let g = spectra_from_t(&two);
                assert!(max_sorted_diff(&g.lam_rho, &s.lam_rho) < 1e-15);
                assert!(max_sorted_diff(&g.lam_pt, &s.lam_pt) < 1e-15);
            }
        }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_corr(&[0.0; 3]).unwrap().verdict, Verdict::Separable);
        let third = -1.0 / 3.0;
        assert_eq!(classify_corr(&[third; 3]).unwrap().verdict, Verdict::Separable);
        let c = classify_corr(&[-0.4; 3]).unwrap();
        assert_eq!(c.verdict, Verdict::Entangled);
        assert!((c.max_lambda - 0.55).abs() < 1e-15);
        assert!(matches!(classify_corr(&[1.0, 1.0, 1.0]), Err(Error::InvalidState { .. })));
    }

    fn check_certificate(d: &DiagonalCorrelation, target: &crate::density::DensityMatrix) -> SeparableDecomposition {
        let cert = decompose_corr(d).unwrap();
        let report = verify(&cert, target, DEFAULT_RESIDUAL_TOL).unwrap();
        assert!(report.passed, "{report:?}");
        let pure = cert.to_pure_ensemble();
        assert!(all_factors_pure(&pure, 1e-12));
        assert!(verify(&pure, target, DEFAULT_RESIDUAL_TOL).unwrap().passed);
        cert
    }

    #[test]
    fn decomposition_examples() {
        let zero = DiagonalCorrelation::from_diagonal([0.0; 3]);
        let cert = check_certificate(&zero, &crate::density::DensityMatrix::maximally_mixed(2));
        assert_eq!(cert.len(), 1);

        let half = [0.5, 0.0, 0.0];
        let target = validate(&hs2_reconstruct(&Hs2::diagonal(half)), 2).unwrap();
        let cert = check_certificate(&DiagonalCorrelation::from_diagonal(half), &target);
        let weights: Vec<f64> = cert.terms.iter().map(|t| t.weight).collect();
        assert_eq!(weights, vec![0.25, 0.25, 0.5]);

        let third = [-1.0 / 3.0; 3];
        let target = validate(&hs2_reconstruct(&Hs2::diagonal(third)), 2).unwrap();
        let cert = check_certificate(&DiagonalCorrelation::from_diagonal(third), &target);
        assert_eq!(cert.len(), 6);
        for (k, term) in cert.terms.iter().enumerate() {
            assert!((term.weight - 1.0 / 6.0).abs() < 1e-15);
            let a = crate::pauli::bloch_vector(&term.factors[0]);
            let b = crate::pauli::bloch_vector(&term.factors[1]);
            let i = k / 2;
            assert!((a[i].abs() - 1.0).abs() < 1e-15);
            assert_eq!(a[i], -b[i]);
        }
    }

    #[test]
    fn rotated_state_certificate_reproduces_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let q1 = Rot3::random(&mut rng);
            let q2 = Rot3::random(&mut rng);
            let t = real::matmul(&real::matmul(q1.matrix(), &real::diag([0.4, 0.3, -0.2])), q2.transpose().matrix());
            let target = validate(&hs2_reconstruct(&Hs2::correlation_only(t)), 2).unwrap();
            let d = diagonalize_t(&hs2_from_matrix(target.matrix())).unwrap();
            check_certificate(&d, &target);
        }
    }

    #[test]
    fn uncertifiable_input_rejected() {
        let d = DiagonalCorrelation::from_diagonal([0.5, 0.5, -0.5]);
        assert!(matches!(decompose_corr(&d), Err(Error::NotCertifiedSeparable { .. })));
    }
}
