//! Minkowski-metric utilities and the SL(2,C) lift of proper Lorentz maps.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;
use super::real::{self, Mat3, Mat4, Vec3};
use super::rotation::Rot3;
use crate::pauli::pauli;

pub const LORENTZ_TOL: f64 = 1e-9;

/// The metric `diag(1, -1, -1, -1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MinkowskiMetric;

impl MinkowskiMetric {
    pub const SIGNS: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

    pub fn matrix(&self) -> Mat4 {
        real::diag(Self::SIGNS)
    }

    /// `x^T eta y`.
    pub fn inner(&self, x: &[f64; 4], y: &[f64; 4]) -> f64 {
        (0..4).map(|i| Self::SIGNS[i] * x[i] * y[i]).sum()
    }

    /// `eta m eta`, i.e. flip the sign of the mixed time/space blocks.
    pub fn sandwich(&self, m: &Mat4) -> Mat4 {
        let mut out = *m;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x *= Self::SIGNS[i] * Self::SIGNS[j];
            }
        }
        out
    }
}

/// max |l eta l^T - eta|.
pub fn lorentz_defect(l: &Mat4) -> f64 {
    let eta = MinkowskiMetric.matrix();
    real::max_abs_diff(&real::matmul(&real::matmul(l, &eta), &real::transpose(l)), &eta)
}

pub fn is_proper_lorentz(l: &Mat4) -> bool {
    lorentz_defect(l) <= LORENTZ_TOL && (real::det4(l) - 1.0).abs() <= LORENTZ_TOL && l[0][0] >= 1.0 - LORENTZ_TOL
}

/// Pure boost with rapidity `|rapidity|` along `rapidity / |rapidity|`.
pub fn boost(rapidity: &Vec3) -> Mat4 {
    let chi = real::norm(rapidity);
    if chi == 0.0 {
        return real::identity();
    }
    let n = rapidity.map(|x| x / chi);
    let (ch, sh) = (chi.cosh(), chi.sinh());
    let mut l: Mat4 = real::identity();
    l[0][0] = ch;
    for i in 0..3 {
        l[0][i + 1] = sh * n[i];
        l[i + 1][0] = sh * n[i];
        for j in 0..3 {
            l[i + 1][j + 1] = if i == j { 1.0 } else { 0.0 } + (ch - 1.0) * n[i] * n[j];
        }
    }
    l
}

pub fn embed_rotation(r: &Rot3) -> Mat4 {
    let mut l: Mat4 = real::identity();
    for i in 0..3 {
        for j in 0..3 {
            l[i + 1][j + 1] = r.matrix()[i][j];
        }
    }
    l
}

/// `boost * rotation` with rapidity drawn per axis from `N(0, max_rapidity / 2)` and clipped.
pub fn random_proper_lorentz<R: Rng + ?Sized>(rng: &mut R, max_rapidity: f64) -> Mat4 {
    let raw: Vec3 = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal) * 0.5 * max_rapidity);
    let chi = real::norm(&raw);
    let rapidity = if chi > max_rapidity { raw.map(|x| x * max_rapidity / chi) } else { raw };
    real::matmul(&boost(&rapidity), &embed_rotation(&Rot3::random(rng)))
}

/// Splits a proper orthochronous `l` into `boost(chi n) * rotation`.
pub fn polar_split(l: &Mat4) -> Option<(Vec3, Rot3)> {
    let ch = l[0][0].max(1.0);
    let chi = ch.acosh();
    let spatial = [l[1][0], l[2][0], l[3][0]];
    let sh = real::norm(&spatial);
    let rapidity = if sh > 0.0 { spatial.map(|x| x * chi / sh) } else { [0.0; 3] };
    let inv_boost = boost(&rapidity.map(|x| -x));
    let rest = real::matmul(&inv_boost, l);
    let rot: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| rest[i + 1][j + 1]));
    let r = Rot3::from_matrix_unchecked(rot);
    (r.orthogonality_error() < 1e-7 && (r.det() - 1.0).abs() < 1e-7).then_some((rapidity, r))
}

/// A in SL(2,C) with `A sigma_nu A^dagger = sum_mu l[mu][nu] sigma_mu`.
///
/// Returns `None` when `l` is not (numerically) proper orthochronous.
pub fn lift_to_sl2c(l: &Mat4) -> Option<ComplexMatrix> {
    let (rapidity, rot) = polar_split(l)?;
    let chi = real::norm(&rapidity);
    let mut a_boost = ComplexMatrix::identity(2).scale((chi / 2.0).cosh());
    if chi > 0.0 {
        let sh = (chi / 2.0).sinh();
        for (i, &x) in rapidity.iter().enumerate() {
            a_boost.add_scaled(&pauli(i + 1), sh * x / chi);
        }
    }
    Some(a_boost.matmul(&rot.to_unitary()))
}

/// Lorentz image of `A` from its action on the Pauli basis (independent of any lift).
pub fn lorentz_of(a: &ComplexMatrix) -> Mat4 {
    let mut l = [[0.0; 4]; 4];
    for nu in 0..4 {
        let img = pauli(nu).conjugate_by(a);
        for (mu, row) in l.iter_mut().enumerate() {
            row[nu] = (pauli(mu).matmul(&img).trace() * Complex64::new(0.5, 0.0)).re;
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn metric_squares_to_identity() {
        let eta = MinkowskiMetric.matrix();
        assert_eq!(real::matmul(&eta, &eta), real::identity());
    }

    #[test]
    fn identity_is_proper() {
        assert!(is_proper_lorentz(&real::identity()));
    }

    #[test]
    fn textbook_boost_is_proper() {
        let chi: f64 = 0.7;
        let mut l: Mat4 = real::identity();
        l[0][0] = chi.cosh();
        l[0][1] = chi.sinh();
        l[1][0] = chi.sinh();
        l[1][1] = chi.cosh();
        assert!(is_proper_lorentz(&l));
        assert!(real::max_abs_diff(&l, &boost(&[chi, 0.0, 0.0])) < 1e-15);
    }

    #[test]
    fn improper_and_non_orthochronous_rejected() {
        assert!(!is_proper_lorentz(&real::diag([1.0, 1.0, 1.0, -1.0])));
        assert!(!is_proper_lorentz(&real::diag([-1.0, -1.0, 1.0, 1.0])));
        assert!(!is_proper_lorentz(&real::diag([1.0, 2.0, 1.0, 1.0])));
    }

    #[test]
    fn random_maps_are_proper_and_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let l = random_proper_lorentz(&mut rng, 1.5);
            assert!(is_proper_lorentz(&l));
            let a = lift_to_sl2c(&l).unwrap();
            let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            assert!((det - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(real::max_abs_diff(&lorentz_of(&a), &l) < 1e-11);
        }
    }

    #[test]
    fn sandwich_matches_explicit_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let l = random_proper_lorentz(&mut rng, 1.0);
        let eta = MinkowskiMetric.matrix();
        let explicit = real::matmul(&real::matmul(&eta, &l), &eta);
        assert!(real::max_abs_diff(&explicit, &MinkowskiMetric.sandwich(&l)) < 1e-15);
    }
}
