//! Proper rotations of the Bloch sphere and their lift to SU(2).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;
use super::real::{self, Mat3, Vec3};

pub const ROTATION_TOL: f64 = 1e-12;

/// A 3x3 orthogonal matrix with determinant +1.
///
/// Acts on Pauli coefficient vectors: the lifted unitary `U` satisfies
/// `U sigma_j U^dagger = sum_i R[i][j] sigma_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot3(Mat3);

impl Rot3 {
    pub const IDENTITY: Rot3 = Rot3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Wraps `m` without checking; callers guarantee orthogonality.
    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Rot3(m)
    }

    /// Wraps `m` if it is a proper rotation within [`ROTATION_TOL`].
    pub fn from_matrix(m: Mat3) -> Option<Self> {
        let r = Rot3(m);
        (r.orthogonality_error() <= ROTATION_TOL && (real::det3(&m) - 1.0).abs() <= ROTATION_TOL)
            .then_some(r)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Rot3 {
        Rot3(real::transpose(&self.0))
    }

    pub fn compose(&self, other: &Rot3) -> Rot3 {
        Rot3(real::matmul(&self.0, &other.0))
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        real::mat_vec(&self.0, v)
    }

    pub fn det(&self) -> f64 {
        real::det3(&self.0)
    }

    /// max |R^T R - I|.
    pub fn orthogonality_error(&self) -> f64 {
        real::max_abs_diff(&real::matmul(&real::transpose(&self.0), &self.0), &real::identity())
    }

    /// Haar-random rotation from a normalized Gaussian quaternion.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Rot3 {
        loop {
            let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let n = real::norm(&q);
            if n > 1e-8 {
                return quaternion_to_rotation(&q.map(|x| x / n));
            }
        }
    }

    /// ZYZ Euler angles `(alpha, beta, gamma)` with `beta` in `[0, pi]`.
    pub fn euler_zyz(&self) -> (f64, f64, f64) {
        let m = &self.0;
        let beta = m[2][2].clamp(-1.0, 1.0).acos();
        let sb = (m[0][2] * m[0][2] + m[1][2] * m[1][2]).sqrt();
        if sb > 1e-10 {
            let alpha = m[1][2].atan2(m[0][2]);
            let gamma = m[2][1].atan2(-m[2][0]);
            (alpha, beta, gamma)
        } else if m[2][2] > 0.0 {
            (m[1][0].atan2(m[0][0]), 0.0, 0.0)
        } else {
            ((-m[1][0]).atan2(m[1][1]), std::f64::consts::PI, 0.0)
        }
    }

    /// Unit quaternion `(w, x, y, z)` with `w >= 0` (Shepperd's method).
    pub fn quaternion(&self) -> [f64; 4] {
        let m = &self.0;
        let tr = m[0][0] + m[1][1] + m[2][2];
        let q = if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            [0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s]
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            [(m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s]
        } else if m[1][1] > m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            [(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s]
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            [(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s]
        };
        let n = real::norm(&q);
        let q = q.map(|x| x / n);
        if q[0] < 0.0 {
            q.map(|x| -x)
        } else {
            q
        }
    }

    /// One of the two SU(2) preimages: `exp(-i theta n.sigma / 2)`.
    pub fn to_unitary(&self) -> ComplexMatrix {
        let [w, x, y, z] = self.quaternion();
        // w I - i (x X + y Y + z Z)
        ComplexMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(w, -z),
                Complex64::new(-y, -x),
                Complex64::new(y, -x),
                Complex64::new(w, z),
            ],
        )
    }
}

pub fn quaternion_to_rotation(q: &[f64; 4]) -> Rot3 {
    let [w, x, y, z] = *q;
    Rot3([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])
}

pub fn rot_z(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

pub fn rot_y(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

/// `Rz(alpha) Ry(beta) Rz(gamma)`.
pub fn so3_from_angles(alpha: f64, beta: f64, gamma: f64) -> Rot3 {
    Rot3(real::matmul(&real::matmul(&rot_z(alpha), &rot_y(beta)), &rot_z(gamma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn zero_angles_is_identity() {
        assert_eq!(so3_from_angles(0.0, 0.0, 0.0), Rot3::IDENTITY);
    }

    #[test]
    fn z_rotation_by_pi() {
        let r = so3_from_angles(PI, 0.0, 0.0);
        assert!(real::max_abs_diff(r.matrix(), &real::diag([-1.0, -1.0, 1.0])) < 1e-15);
    }

    #[test]
    fn y_quarter_turn_maps_z_to_x() {
        let r = so3_from_angles(0.0, FRAC_PI_2, 0.0);
        let v = r.apply(&[0.0, 0.0, 1.0]);
        assert!((v[0] - 1.0).abs() < 1e-15 && v[1].abs() < 1e-15 && v[2].abs() < 1e-15);
    }

    #[test]
    fn composition_of_elementary_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (a, b, g) = (rng.random_range(-PI..PI), rng.random_range(0.0..PI), rng.random_range(-PI..PI));
            let composed = so3_from_angles(a, 0.0, 0.0)
                .compose(&so3_from_angles(0.0, b, 0.0))
                .compose(&so3_from_angles(0.0, 0.0, g));
            assert!(real::max_abs_diff(composed.matrix(), so3_from_angles(a, b, g).matrix()) < 1e-12);
            let r = so3_from_angles(a, b, g);
            assert!(r.orthogonality_error() < 1e-12);
            assert!((r.det() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn euler_round_trip_including_gimbal_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut cases: Vec<Rot3> = (0..200).map(|_| Rot3::random(&mut rng)).collect();
        cases.push(so3_from_angles(0.4, 0.0, 0.3));
        cases.push(so3_from_angles(0.4, PI, -0.3));
        cases.push(Rot3::IDENTITY);
        for r in cases {
            let (a, b, g) = r.euler_zyz();
            assert!(real::max_abs_diff(so3_from_angles(a, b, g).matrix(), r.matrix()) < 1e-9);
        }
    }

    #[test]
    fn quaternion_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut cases: Vec<Rot3> = (0..200).map(|_| Rot3::random(&mut rng)).collect();
        cases.push(so3_from_angles(PI, 0.0, 0.0));
        cases.push(so3_from_angles(0.0, PI, 0.0));
        cases.push(Rot3::from_matrix(real::diag([1.0, -1.0, -1.0])).unwrap());
        for r in cases {
            let back = quaternion_to_rotation(&r.quaternion());
            assert!(real::max_abs_diff(back.matrix(), r.matrix()) < 1e-12);
        }
    }

    #[test]
    fn unitary_lift_conjugates_paulis_by_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let r = Rot3::random(&mut rng);
            let u = r.to_unitary();
            assert!(u.matmul(&u.adjoint()).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
            for j in 0..3 {
                let lhs = pauli(j + 1).conjugate_by(&u);
                let mut rhs = ComplexMatrix::zeros(2, 2);
                for i in 0..3 {
                    rhs.add_scaled(&pauli(i + 1), r.matrix()[i][j]);
                }
                assert!(lhs.max_abs_diff(&rhs) < 1e-13);
            }
        }
    }

    #[test]
    fn from_matrix_rejects_reflections() {
        assert!(Rot3::from_matrix(real::diag([1.0, 1.0, -1.0])).is_none());
        assert!(Rot3::from_matrix(real::diag([1.0, 2.0, 0.5])).is_none());
    }
}
