//! 3x3 real SVD with both factors in SO(3).

use super::real::{self, Mat3, Vec3};
use super::rotation::Rot3;

const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone, Copy)]
pub struct Svd3 {
    pub u: Rot3,
    /// `|d0| >= |d1| >= |d2|`, `d0, d1 >= 0`; `d2` carries the sign of `det t`.
    pub d: Vec3,
    pub v: Rot3,
}

/// Computes `t = u diag(d) v^T` with proper rotations `u`, `v`.
///
/// One-sided Jacobi orthogonalizes the columns of `t v`; the third left
/// vector is taken as the cross product of the first two so `u` is always
/// proper, and a reflection in `v` is absorbed into the sign of `d2`.
pub fn svd3(t: &Mat3) -> Svd3 {
    let mut w = *t;
    let mut v: Mat3 = real::identity();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let wp = real::column(&w, p);
            let wq = real::column(&w, q);
            let alpha = real::dot(&wp, &wp);
            let beta = real::dot(&wq, &wq);
            let gamma = real::dot(&wp, &wq);
            if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let tan = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let c = 1.0 / (1.0 + tan * tan).sqrt();
            let s = c * tan;
            for m in [&mut w, &mut v] {
                for row in m.iter_mut() {
                    let (a, b) = (row[p], row[q]);
                    row[p] = c * a - s * b;
                    row[q] = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // Order columns by decreasing norm.
    let norms: Vec3 = std::array::from_fn(|j| real::norm(&real::column(&w, j)));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let mut vs: Mat3 = [[0.0; 3]; 3];
    for (k, &src) in order.iter().enumerate() {
        real::set_column(&mut vs, k, &real::column(&v, src));
    }
    if real::det3(&vs) < 0.0 {
        for row in vs.iter_mut() {
            row[2] = -row[2];
        }
    }

    let scale = norms.iter().cloned().fold(0.0, f64::max);
    let tv0 = real::mat_vec(t, &real::column(&vs, 0));
    let tv1 = real::mat_vec(t, &real::column(&vs, 1));
    let u0 = unit_or_fallback(&tv0, &[], scale);
    let u1 = unit_or_fallback(&tv1, &[u0], scale);
    let u2 = real::cross(&u0, &u1);
    let mut u: Mat3 = [[0.0; 3]; 3];
    real::set_column(&mut u, 0, &u0);
    real::set_column(&mut u, 1, &u1);
    real::set_column(&mut u, 2, &u2);

    let core = real::matmul(&real::matmul(&real::transpose(&u), t), &vs);
    Svd3 {
        u: Rot3::from_matrix_unchecked(u),
        d: [core[0][0], core[1][1], core[2][2]],
        v: Rot3::from_matrix_unchecked(vs),
    }
}

/// Normalizes `x` after projecting out `basis`; falls back to the first
/// standard basis vector that is well separated from `basis`.
fn unit_or_fallback(x: &Vec3, basis: &[Vec3], scale: f64) -> Vec3 {
    let project = |mut y: Vec3| {
        for b in basis {
            let c = real::dot(&y, b);
            for i in 0..3 {
                y[i] -= c * b[i];
            }
        }
        y
    };
    let y = project(*x);
    let n = real::norm(&y);
    if n > 0.0 && n > 1e-14 * scale {
        return y.map(|c| c / n);
    }
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let y = project(e);
        let n = real::norm(&y);
        if n > 0.5 {
            return y.map(|c| c / n);
        }
    }
    unreachable!("a 3-vector basis of size < 3 always leaves a free axis")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(t: &Mat3) -> Svd3 {
        let s = svd3(t);
        for r in [&s.u, &s.v] {
            assert!(r.orthogonality_error() < 1e-12, "not orthogonal");
            assert!((r.det() - 1.0).abs() < 1e-12, "not proper");
        }
        let core = real::matmul(&real::matmul(&real::transpose(s.u.matrix()), t), s.v.matrix());
        assert!(real::max_abs_diff(&core, &real::diag(s.d)) < 1e-12, "not diagonal: {core:?}");
        assert!(s.d[0] >= 0.0 && s.d[1] >= 0.0);
        assert!(s.d[0] >= s.d[1] && s.d[1] >= s.d[2].abs() - 1e-15);
        s
    }

    #[test]
    fn already_diagonal() {
        let s = check(&real::diag([0.5, 0.3, 0.1]));
        assert_eq!(s.d, [0.5, 0.3, 0.1]);
        assert_eq!(s.u, Rot3::IDENTITY);
        assert_eq!(s.v, Rot3::IDENTITY);
    }

    #[test]
    fn negative_determinant_moves_sign_to_last_value() {
        let s = check(&real::diag([1.0, -1.0, 1.0]));
        assert!(real::vec_max_abs_diff(&s.d, &[1.0, 1.0, -1.0]) < 1e-15);
    }

    #[test]
    fn zero_matrix() {
        let s = check(&[[0.0; 3]; 3]);
        assert_eq!(s.d, [0.0; 3]);
        assert_eq!(s.u, Rot3::IDENTITY);
        assert_eq!(s.v, Rot3::IDENTITY);
    }

    #[test]
    fn rank_deficient_inputs() {
        check(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 0.0]]);
        check(&[[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1e-300]]);
        check(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1e-17]]);
    }

    #[test]
    fn random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let t: Mat3 = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
            let s = check(&t);
            let prod = s.d[0] * s.d[1] * s.d[2];
            assert!((prod - real::det3(&t)).abs() < 1e-10);
        }
    }

    #[test]
    fn recovers_planted_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let q1 = Rot3::random(&mut rng);
            let q2 = Rot3::random(&mut rng);
            let t = real::matmul(&real::matmul(q1.matrix(), &real::diag([0.5, 0.3, 0.1])), q2.transpose().matrix());
            let s = check(&t);
            assert!(real::vec_max_abs_diff(&s.d, &[0.5, 0.3, 0.1]) < 1e-12);
        }
    }
}
