//! Pauli-basis (Hilbert-Schmidt) coefficients of one-, two- and three-qubit operators.
//!
//! Qubit 0 is the most significant bit of the computational-basis index, so
//! for two qubits the basis order is |00>, |01>, |10>, |11> with qubit A first.

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::linalg::{real, ComplexMatrix, Mat3, Mat4, Vec3, ZERO};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `sigma_0 = I`, then X, Y, Z.
pub fn pauli(index: usize) -> ComplexMatrix {
    let z = ZERO;
    let one = Complex64::new(1.0, 0.0);
    let data = match index {
        0 => vec![one, z, z, one],
        1 => vec![z, one, one, z],
        2 => vec![z, -I, I, z],
        3 => vec![one, z, z, -one],
        _ => panic!("Pauli index {index} out of range"),
    };
    ComplexMatrix::from_vec(2, 2, data)
}

/// Entry of `sigma_label` at row `bit`, and the column it lives in.
fn pauli_entry(label: usize, bit: usize) -> (usize, Complex64) {
    match label {
        0 => (bit, Complex64::new(1.0, 0.0)),
        1 => (bit ^ 1, Complex64::new(1.0, 0.0)),
        2 => (bit ^ 1, if bit == 0 { -I } else { I }),
        3 => (bit, Complex64::new(if bit == 0 { 1.0 } else { -1.0 }, 0.0)),
        _ => panic!("Pauli index {label} out of range"),
    }
}

/// Nonzero entries `(row, col, value)` of a Pauli string; one per row.
fn pauli_string_entries(labels: &[usize]) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
    let n = labels.len();
    (0..1usize << n).map(move |row| {
        let mut col = 0;
        let mut value = Complex64::new(1.0, 0.0);
        for (k, &label) in labels.iter().enumerate() {
            let bit = (row >> (n - 1 - k)) & 1;
            let (c, v) = pauli_entry(label, bit);
            col |= c << (n - 1 - k);
            value *= v;
        }
        (row, col, value)
    })
}

/// Dense matrix of `sigma_{l0} (x) sigma_{l1} (x) ...`.
pub fn pauli_string(labels: &[usize]) -> ComplexMatrix {
    let dim = 1 << labels.len();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (r, c, v) in pauli_string_entries(labels) {
        m[(r, c)] = v;
    }
    m
}

/// `Re tr(m P)` for the Pauli string `P` given by `labels`.
///
/// Contributions are split by sign and each group is summed in sorted
/// order, so coefficients that vanish by symmetry come out as exact zeros.
pub fn pauli_expectation(m: &ComplexMatrix, labels: &[usize]) -> f64 {
    let mut plus = Vec::with_capacity(8);
    let mut minus = Vec::with_capacity(8);
    for (r, c, v) in pauli_string_entries(labels) {
        let x = (m[(c, r)] * v).re;
        if x >= 0.0 {
            plus.push(x);
        } else {
            minus.push(-x);
        }
    }
    plus.sort_by(f64::total_cmp);
    minus.sort_by(f64::total_cmp);
    plus.iter().sum::<f64>() - minus.iter().sum::<f64>()
}

/// `(1 / 2^n) sum_P c_P P` over the supplied `(labels, coefficient)` pairs.
pub fn pauli_sum(n_qubits: usize, terms: impl IntoIterator<Item = (Vec<usize>, f64)>) -> ComplexMatrix {
    let dim = 1 << n_qubits;
    let mut m = ComplexMatrix::zeros(dim, dim);
    let norm = 1.0 / dim as f64;
    for (labels, coeff) in terms {
        assert_eq!(labels.len(), n_qubits);
        if coeff == 0.0 {
            continue;
        }
        for (r, c, v) in pauli_string_entries(&labels) {
            m[(r, c)] += v * (coeff * norm);
        }
    }
    m
}

/// Single-qubit state `(I + n.sigma) / 2`.
pub fn bloch_state(n: &Vec3) -> ComplexMatrix {
    pauli_sum(1, [(vec![0], 1.0), (vec![1], n[0]), (vec![2], n[1]), (vec![3], n[2])])
}

/// Bloch vector `(tr(rho X), tr(rho Y), tr(rho Z))` of a single-qubit operator.
pub fn bloch_vector(rho: &ComplexMatrix) -> Vec3 {
    std::array::from_fn(|i| pauli_expectation(rho, &[i + 1]))
}

/// The fifteen real coefficients of a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hs2 {
    /// Local Bloch vector of qubit A.
    pub r: Vec3,
    /// Local Bloch vector of qubit B.
    pub s: Vec3,
    /// Correlation matrix `t[m][n] = tr(rho sigma_m (x) sigma_n)`.
    pub t: Mat3,
}

impl Hs2 {
    pub fn correlation_only(t: Mat3) -> Self {
        Hs2 { r: [0.0; 3], s: [0.0; 3], t }
    }

    pub fn diagonal(t: Vec3) -> Self {
        Self::correlation_only(real::diag(t))
    }

    pub fn r_matrix(&self) -> RMatrix {
        let mut m = [[0.0; 4]; 4];
        m[0][0] = 1.0;
        for i in 0..3 {
            m[0][i + 1] = self.s[i];
            m[i + 1][0] = self.r[i];
            for j in 0..3 {
                m[i + 1][j + 1] = self.t[i][j];
            }
        }
        RMatrix(m)
    }

    pub fn max_off_diagonal_t(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    worst = worst.max(self.t[i][j].abs());
                }
            }
        }
        worst
    }
}

pub fn hs2_decompose(rho: &DensityMatrix) -> Hs2 {
    hs2_from_matrix(rho.matrix())
}

pub fn hs2_from_matrix(m: &ComplexMatrix) -> Hs2 {
    let r = std::array::from_fn(|i| pauli_expectation(m, &[i + 1, 0]));
    let s = std::array::from_fn(|i| pauli_expectation(m, &[0, i + 1]));
    let t = std::array::from_fn(|i| std::array::from_fn(|j| pauli_expectation(m, &[i + 1, j + 1])));
    Hs2 { r, s, t }
}

pub fn hs2_reconstruct(hs: &Hs2) -> ComplexMatrix {
    hs.r_matrix().reconstruct()
}

/// `R[alpha][beta] = tr(rho sigma_alpha (x) sigma_beta)`, so `4 rho = sum R sigma (x) sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMatrix(pub Mat4);

impl RMatrix {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        RMatrix(std::array::from_fn(|a| std::array::from_fn(|b| pauli_expectation(m, &[a, b]))))
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let terms = (0..4).flat_map(|a| (0..4).map(move |b| (vec![a, b], self.0[a][b])));
        pauli_sum(2, terms)
    }

    /// Inverse of [`Hs2::r_matrix`] after normalizing so that `R[0][0] = 1`.
    pub fn to_hs2(&self) -> Hs2 {
        let n = self.0[0][0];
        Hs2 {
            r: std::array::from_fn(|i| self.0[i + 1][0] / n),
            s: std::array::from_fn(|i| self.0[0][i + 1] / n),
            t: std::array::from_fn(|i| std::array::from_fn(|j| self.0[i + 1][j + 1] / n)),
        }
    }
}

pub fn r_matrix(rho: &DensityMatrix) -> RMatrix {
    RMatrix::from_matrix(rho.matrix())
}

pub fn r_matrix_reconstruct(r: &RMatrix) -> ComplexMatrix {
    r.reconstruct()
}

/// Three-qubit full-correlation coefficients `G[a][b][c]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GTensor(pub [[[f64; 3]; 3]; 3]);

impl GTensor {
    pub fn zero() -> Self {
        GTensor([[[0.0; 3]; 3]; 3])
    }

    pub fn single(a: usize, b: usize, c: usize, value: f64) -> Self {
        let mut g = Self::zero();
        g.0[a][b][c] = value;
        g
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.0[a][b][c]
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, usize), f64)> + '_ {
        (0..27).map(move |k| {
            let (a, b, c) = (k / 9, (k / 3) % 3, k % 3);
            ((a, b, c), self.0[a][b][c])
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.iter().map(|(_, x)| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &GTensor) -> f64 {
        self.iter().zip(other.iter()).map(|((_, a), (_, b))| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Extracts `G` and the Frobenius norm of every other non-identity coefficient.
///
/// A zero residual means the state is `(I + sum G sigma (x) sigma (x) sigma) / 8`.
pub fn g_extract(rho: &DensityMatrix) -> (GTensor, f64) {
    g_from_matrix(rho.matrix())
}

pub fn g_from_matrix(m: &ComplexMatrix) -> (GTensor, f64) {
    let mut g = GTensor::zero();
    let mut residual = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let coeff = pauli_expectation(m, &[a, b, c]);
                if a > 0 && b > 0 && c > 0 {
                    g.0[a - 1][b - 1][c - 1] = coeff;
                } else if a + b + c > 0 {
                    residual += coeff * coeff;
                }
            }
        }
    }
    (g, residual.sqrt())
}

pub fn g_reconstruct(g: &GTensor) -> ComplexMatrix {
    let terms = std::iter::once((vec![0, 0, 0], 1.0))
        .chain(g.iter().map(|((a, b, c), x)| (vec![a + 1, b + 1, c + 1], x)));
    pauli_sum(3, terms)
}
