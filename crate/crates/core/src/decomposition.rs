//! Separable ensembles: weighted sums of product states, and their verification.

use crate::density::{validate, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, kron_all, ComplexMatrix, Vec3};
use crate::linalg::real;
use crate::pauli::{bloch_state, bloch_vector};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
pub const FACTOR_TOL: f64 = 1e-10;
/// Terms lighter than this are dropped while building certificates.
pub(crate) const WEIGHT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm {
    pub weight: f64,
    /// One 2x2 density matrix per qubit.
    pub factors: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparableDecomposition {
    pub n_qubits: usize,
    pub terms: Vec<ProductTerm>,
    /// Describes any local transformation relating the certificate to its input.
    pub frame_note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationReport {
    pub residual_max_abs: f64,
    pub weight_sum_error: f64,
    pub worst_factor_violation: f64,
    pub min_weight: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SeparableDecomposition {
    /// Builds a certificate from pure-state Bloch vectors, dropping negligible
    /// weights and renormalizing what is left.
    pub(crate) fn from_bloch_terms(n_qubits: usize, raw: Vec<(f64, Vec<Vec3>)>) -> Self {
        let kept: Vec<_> = raw.into_iter().filter(|(w, _)| *w > WEIGHT_FLOOR).collect();
        let total: f64 = kept.iter().map(|(w, _)| w).sum();
        let terms = kept
            .into_iter()
            .map(|(w, blochs)| ProductTerm {
                weight: w / total,
                factors: blochs.iter().map(bloch_state).collect(),
            })
            .collect();
        SeparableDecomposition {
            n_qubits,
            terms,
            frame_note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.frame_note = Some(note.into());
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// Applies `f -> A_k f A_k^dagger` to every factor on qubit `k`.
    ///
    /// The `A_k` need not be unitary: factor traces are folded into the
    /// weights, and the weights are renormalized to sum to one.
    pub fn map_local(&self, ops: &[ComplexMatrix]) -> SeparableDecomposition {
        assert_eq!(ops.len(), self.n_qubits);
        let mut terms: Vec<ProductTerm> = self
            .terms
            .iter()
            .map(|term| {
                let mut weight = term.weight;
                let factors = term
                    .factors
                    .iter()
                    .zip(ops)
                    .map(|(f, a)| {
                        let g = f.conjugate_by(a);
                        let tr = g.trace().re;
                        weight *= tr;
                        g.scale(1.0 / tr)
                    })
                    .collect();
                ProductTerm { weight, factors }
            })
            .collect();
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        for t in &mut terms {
            t.weight /= total;
        }
        SeparableDecomposition {
            n_qubits: self.n_qubits,
            terms,
            frame_note: self.frame_note.clone(),
        }
    }
}

impl SeparableDecomposition {
    /// Rewrites every mixed factor with Bloch vector `n` as
    /// `(1 + |n|)/2 pure(n/|n|) + (1 - |n|)/2 pure(-n/|n|)` (using the z axis
    /// when `n = 0`), giving an equivalent ensemble of pure product states.
    pub fn to_pure_ensemble(&self) -> SeparableDecomposition {
        let mut raw: Vec<(f64, Vec<Vec3>)> = Vec::new();
        for term in &self.terms {
            let mut partial: Vec<(f64, Vec<Vec3>)> = vec![(term.weight, Vec::with_capacity(self.n_qubits))];
            for f in &term.factors {
                let n = bloch_vector(f);
                let len = real::norm(&n);
                let next: Vec<(f64, Vec<Vec3>)> = if len >= 1.0 - 1e-12 {
                    partial
                        .into_iter()
                        .map(|(w, mut b)| {
                            b.push(n.map(|x| x / len));
                            (w, b)
                        })
                        .collect()
                } else {
                    let axis = if len > 1e-12 { n.map(|x| x / len) } else { [0.0, 0.0, 1.0] };
                    let mut out = Vec::with_capacity(2 * partial.len());
                    for (w, b) in partial {
                        for (p, dir) in [((1.0 + len) / 2.0, axis), ((1.0 - len) / 2.0, axis.map(|x| -x))] {
                            let mut bb = b.clone();
                            bb.push(dir);
                            out.push((w * p, bb));
                        }
                    }
                    out
                };
                partial = next;
            }
            raw.extend(partial);
        }
        let mut out = SeparableDecomposition::from_bloch_terms(self.n_qubits, raw);
        out.frame_note = self.frame_note.clone();
        out
    }
}

/// `sum_j w_j f_j1 (x) ... (x) f_jn`.
pub fn recombine(d: &SeparableDecomposition) -> ComplexMatrix {
    let dim = 1 << d.n_qubits;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for term in &d.terms {
        out.add_scaled(&kron_all(term.factors.iter()), term.weight);
    }
    out
}

/// How far `f` is from being a valid single-qubit density matrix.
pub fn factor_violation(f: &ComplexMatrix) -> f64 {
    if f.rows() != 2 || f.cols() != 2 {
        return f64::INFINITY;
    }
    let herm = f.hermiticity_violation();
    let trace = (f.trace() - crate::linalg::ONE).norm();
    let neg = hermitian_eigenvalues(f).map_or(f64::INFINITY, |v| (-v[0]).max(0.0));
    herm.max(trace).max(neg)
}

pub fn verify(d: &SeparableDecomposition, target: &DensityMatrix, tol: f64) -> Result<VerificationReport> {
    verify_matrix(d, target.matrix(), tol)
}

pub fn verify_matrix(d: &SeparableDecomposition, target: &ComplexMatrix, tol: f64) -> Result<VerificationReport> {
    let dim = 1usize << d.n_qubits;
    let bad_shape = d.terms.iter().any(|t| t.factors.len() != d.n_qubits);
    if target.rows() != dim || target.cols() != dim || bad_shape {
        return Err(Error::DimensionMismatch {
            certificate: dim,
            target: target.rows(),
        });
    }
    let residual_max_abs = recombine(d).max_abs_diff(target);
    let weight_sum_error = (d.weight_sum() - 1.0).abs();
    let worst_factor_violation = d
        .terms
        .iter()
        .flat_map(|t| t.factors.iter())
        .map(factor_violation)
        .fold(0.0, f64::max);
    let min_weight = d.terms.iter().map(|t| t.weight).fold(f64::INFINITY, f64::min);
    let passed = !d.terms.is_empty()
        && min_weight > 0.0
        && residual_max_abs <= tol
        && weight_sum_error <= WEIGHT_SUM_TOL
        && worst_factor_violation <= FACTOR_TOL;
    Ok(VerificationReport {
        residual_max_abs,
        weight_sum_error,
        worst_factor_violation,
        min_weight,
        tolerance: tol,
        passed,
    })
}

/// `tr(f^2)` of every factor stays within `tol` of one.
pub fn all_factors_pure(d: &SeparableDecomposition, tol: f64) -> bool {
    d.terms
        .iter()
        .flat_map(|t| t.factors.iter())
        .all(|f| (f.matmul(f).trace().re - 1.0).abs() <= tol && factor_violation(f) <= FACTOR_TOL)
}

/// Validates the recombined certificate as a state in its own right.
pub fn recombine_state(d: &SeparableDecomposition) -> Result<DensityMatrix> {
    validate(&recombine(d), d.n_qubits)
}
