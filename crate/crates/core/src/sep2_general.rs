//! General two-qubit states, including local Bloch vectors.
//!
//! Two routes to a certificate: a direct sufficient construction when the
//! local vectors are short enough, and the Lorentz normal form
//! `R = L1 Sigma L2^T` of the 4x4 Pauli coefficient matrix, which reduces a
//! generic state to a diagonal one under local invertible maps.

use nalgebra::Matrix4;

use crate::decomposition::SeparableDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{is_proper_lorentz, lift_to_sl2c, real, symmetric_eigen, Mat4, MinkowskiMetric, Vec3};
use crate::pauli::{Hs2, RMatrix};
use crate::sep2_correlation::{decompose_corr, DiagonalCorrelation, BOUNDARY_TOL};
use crate::verdict::Verdict;

pub const T_DIAGONAL_TOL: f64 = 1e-10;
/// Reconstruction tolerance for an accepted normal form.
pub const NORMAL_FORM_TOL: f64 = 1e-8;
/// Relative spread under which eigenvalues of `eta R^T eta R` are treated as equal.
const CLUSTER_TOL: f64 = 1e-6;
/// Relative size below which a normal-form value counts as zero.
const ZERO_VALUE_TOL: f64 = 1e-10;
/// Minimal |eta-norm| of a basis vector; smaller means lightlike.
const LIGHTLIKE_TOL: f64 = 1e-8;

const ETA: [f64; 4] = MinkowskiMetric::SIGNS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaForm {
    /// `diag(s0, s1, s2, s3)` with `s0 >= s1 >= s2 >= |s3|`.
    Generic { s: [f64; 4] },
    /// The non-diagonalizable layout
    /// `[[a, 0, 0, b], [0, d, 0, 0], [0, 0, -d, 0], [c, 0, 0, a + c - b]]`.
    NonGeneric { a: f64, b: f64, c: f64, d: f64 },
}

impl SigmaForm {
    pub fn matrix(&self) -> Mat4 {
        match *self {
            SigmaForm::Generic { s } => real::diag(s),
            SigmaForm::NonGeneric { a, b, c, d } => [
                [a, 0.0, 0.0, b],
                [0.0, d, 0.0, 0.0],
                [0.0, 0.0, -d, 0.0],
                [c, 0.0, 0.0, a + c - b],
            ],
        }
    }

    pub fn is_generic(&self) -> bool {
        matches!(self, SigmaForm::Generic { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzFactors {
    pub l1: Mat4,
    pub l2: Mat4,
    pub sigma: SigmaForm,
    /// `max |L1 Sigma L2^T - R|`; only meaningful for the generic form.
    pub reconstruction_error: f64,
    /// Why the generic construction was abandoned, if it was.
    pub note: Option<&'static str>,
}

/// Ensemble for a state whose correlation matrix is already diagonal, valid
/// whenever `1 - |a| - |b| - sum |t_i| >= 0`.
///
/// Returns `Ok(None)` when that condition fails; the state may still be separable.
pub fn sufficient_decompose_general(hs: &Hs2) -> Result<Option<SeparableDecomposition>> {
    let off_diagonal = hs.max_off_diagonal_t();
    if off_diagonal > T_DIAGONAL_TOL {
        return Err(Error::TNotDiagonal { off_diagonal });
    }
    let t = [hs.t[0][0], hs.t[1][1], hs.t[2][2]];
    let a = real::norm(&hs.r);
    let b = real::norm(&hs.s);
    let remainder = 1.0 - a - b - t.iter().map(|x| x.abs()).sum::<f64>();
    if remainder < -1e-12 {
        return Ok(None);
    }
    let mut raw: Vec<(f64, Vec<Vec3>)> = Vec::with_capacity(9);
    for (i, &ti) in t.iter().enumerate() {
        if ti == 0.0 {
            continue;
        }
        let mut e = [0.0; 3];
        e[i] = 1.0;
        let f = e.map(|x| x * ti.signum());
        raw.push((ti.abs() / 2.0, vec![f, e]));
        raw.push((ti.abs() / 2.0, vec![f.map(|x| -x), e.map(|x| -x)]));
    }
    if a > 0.0 {
        raw.push((a, vec![hs.r.map(|x| x / a), [0.0; 3]]));
    }
    if b > 0.0 {
        raw.push((b, vec![[0.0; 3], hs.s.map(|x| x / b)]));
    }
    raw.push((remainder, vec![[0.0; 3], [0.0; 3]]));
    Ok(Some(SeparableDecomposition::from_bloch_terms(2, raw)))
}

/// Computes `R = L1 Sigma L2^T` with proper orthochronous Lorentz `L1`, `L2`.
///
/// `L2` comes from the eigenvectors of `eta R^T eta R` (equivalently, the
/// pencil `R^T eta R - lambda eta`), normalized in the Minkowski metric;
/// `L1` follows from `R L2^{-T}`. The result is accepted only if both factors
/// are proper Lorentz maps and the product reproduces `R`. Defective,
/// complex, lightlike or rank-zero structure yields [`SigmaForm::NonGeneric`]
/// with parameters read directly off `R`.
pub fn lorentz_normal_form(r: &RMatrix) -> Result<LorentzFactors> {
    let rm = r.0;
    if rm.iter().flatten().any(|x| !x.is_finite()) || !(rm[0][0] > 0.0) {
        return Err(Error::NormalFormFailure("R[0][0] must be positive and all entries finite".into()));
    }
    match generic_form(&rm) {
        Ok(f) => Ok(f),
        Err(GenericFailure::Structure(note)) => Ok(non_generic(&rm, note)),
        Err(GenericFailure::Validation(msg)) => Err(Error::NormalFormFailure(msg)),
    }
}

fn non_generic(rm: &Mat4, note: &'static str) -> LorentzFactors {
    LorentzFactors {
        l1: real::identity(),
        l2: real::identity(),
        sigma: SigmaForm::NonGeneric {
            a: rm[0][0],
            b: rm[0][3],
            c: rm[3][0],
            d: rm[1][1],
        },
        reconstruction_error: f64::NAN,
        note: Some(note),
    }
}

enum GenericFailure {
    Structure(&'static str),
    Validation(String),
}

fn column(m: &Mat4, j: usize) -> [f64; 4] {
    real::column(m, j)
}

fn eta_inner(x: &[f64; 4], y: &[f64; 4]) -> f64 {
    MinkowskiMetric.inner(x, y)
}

fn generic_form(rm: &Mat4) -> std::result::Result<LorentzFactors, GenericFailure> {
    use GenericFailure::*;
    let eta = MinkowskiMetric.matrix();
    let s_mat = real::matmul(&real::matmul(&real::transpose(rm), &eta), rm);
    let m = real::matmul(&eta, &s_mat);
    let scale = rm[0][0] * rm[0][0];

    let nm = Matrix4::from_fn(|i, j| m[i][j]);
    let mut eig: Vec<f64> = Vec::with_capacity(4);
    for z in nm.complex_eigenvalues().iter() {
        if z.im.abs() > CLUSTER_TOL * scale {
            return Err(Structure("complex eigenvalues"));
        }
        if z.re < -CLUSTER_TOL * scale {
            return Err(Structure("negative eigenvalue"));
        }
        eig.push(z.re.max(0.0));
    }
    eig.sort_by(f64::total_cmp);

    // Group nearly equal eigenvalues.
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for &x in &eig {
        match clusters.last_mut() {
            Some(c) if x - c[c.len() - 1] <= CLUSTER_TOL * scale => c.push(x),
            _ => clusters.push(vec![x]),
        }
    }

    // Eta-orthonormal eigenbasis, one cluster at a time.
    let mut timelike: Vec<[f64; 4]> = Vec::new();
    let mut spacelike: Vec<[f64; 4]> = Vec::new();
    for c in &clusters {
        let k = c.len();
        let lambda = c.iter().sum::<f64>() / k as f64;
        let pencil: Vec<f64> = (0..16).map(|p| s_mat[p / 4][p % 4] - lambda * eta[p / 4][p % 4]).collect();
        let (vals, vecs) = symmetric_eigen(4, &pencil);
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs()));
        if vals[order[k - 1]].abs() > CLUSTER_TOL * scale.max(1.0) * 10.0 {
            return Err(Structure("defective eigenvalue"));
        }
        let basis: Vec<[f64; 4]> = order[..k].iter().map(|&i| std::array::from_fn(|p| vecs[i][p])).collect();
        let gram: Vec<f64> = (0..k * k).map(|p| eta_inner(&basis[p / k], &basis[p % k])).collect();
        let (g, q) = symmetric_eigen(k, &gram);
        for (gi, qi) in g.iter().zip(&q) {
            if gi.abs() < LIGHTLIKE_TOL {
                return Err(Structure("lightlike eigenvector"));
            }
            let norm = gi.abs().sqrt();
            let v: [f64; 4] = std::array::from_fn(|p| (0..k).map(|j| qi[j] * basis[j][p]).sum::<f64>() / norm);
            if *gi > 0.0 {
                timelike.push(v);
            } else {
                spacelike.push(v);
            }
        }
    }
    if timelike.len() != 1 {
        return Err(Structure("no unique timelike direction"));
    }

    let mut y = [[0.0; 4]; 4];
    real::set_column(&mut y, 0, &timelike[0]);
    for (j, v) in spacelike.iter().enumerate() {
        real::set_column(&mut y, j + 1, v);
    }
    if y[0][0] < 0.0 {
        negate_column(&mut y, 0);
    }
    if real::det4(&y) < 0.0 {
        negate_column(&mut y, 1);
    }

    let ry = real::matmul(rm, &y);
    let mut s = [0.0; 4];
    for (j, sj) in s.iter_mut().enumerate() {
        let c = column(&ry, j);
        *sj = eta_inner(&c, &c).abs().sqrt();
    }
    if s[0] <= ZERO_VALUE_TOL * rm[0][0] {
        return Err(Structure("vanishing timelike value"));
    }

    // Order spatial directions by decreasing value.
    let mut order = [1usize, 2, 3];
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let perm = [0, order[0], order[1], order[2]];
    let mut y_sorted = [[0.0; 4]; 4];
    let mut s_sorted = [0.0; 4];
    for (k, &src) in perm.iter().enumerate() {
        real::set_column(&mut y_sorted, k, &column(&y, src));
        s_sorted[k] = s[src];
    }
    if real::det4(&y_sorted) < 0.0 {
        negate_column(&mut y_sorted, 3);
    }
    let y = y_sorted;
    let mut s = s_sorted;
    let ry = real::matmul(rm, &y);

    let mut l1 = [[0.0; 4]; 4];
    let mut missing = Vec::new();
    for j in 0..4 {
        if s[j] > ZERO_VALUE_TOL * s[0] {
            let c = column(&ry, j).map(|x| x / s[j]);
            real::set_column(&mut l1, j, &c);
        } else {
            s[j] = 0.0;
            missing.push(j);
        }
    }
    complete_eta_basis(&mut l1, &missing);
    if l1[0][0] < 0.0 {
        return Err(Validation("L1 is not orthochronous".into()));
    }
    if real::det4(&l1) < 0.0 {
        negate_column(&mut l1, 3);
        s[3] = -s[3];
    }
    let l2 = MinkowskiMetric.sandwich(&y);

    let sigma = SigmaForm::Generic { s };
    let rebuilt = real::matmul(&real::matmul(&l1, &sigma.matrix()), &real::transpose(&l2));
    let reconstruction_error = real::max_abs_diff(&rebuilt, rm);
    if !is_proper_lorentz(&l1) || !is_proper_lorentz(&l2) {
        return Err(Validation("factors are not proper Lorentz maps".into()));
    }
    if reconstruction_error > NORMAL_FORM_TOL * rm[0][0].max(1.0) {
        return Err(Validation(format!("reconstruction error {reconstruction_error:e}")));
    }
    if s[1] > s[0] * (1.0 + 1e-9) {
        return Err(Validation("timelike value is not the largest".into()));
    }
    Ok(LorentzFactors {
        l1,
        l2,
        sigma,
        reconstruction_error,
        note: None,
    })
}

fn negate_column(m: &mut Mat4, j: usize) {
    for row in m.iter_mut() {
        row[j] = -row[j];
    }
}

/// Fills the listed columns with eta-orthonormal vectors orthogonal to the others.
fn complete_eta_basis(m: &mut Mat4, missing: &[usize]) {
    let mut filled: Vec<usize> = (0..4).filter(|j| !missing.contains(j)).collect();
    for &j in missing {
        let mut best: Option<[f64; 4]> = None;
        let mut best_norm = 0.0;
        for k in 0..4 {
            let mut v = [0.0; 4];
            v[k] = 1.0;
            for &f in &filled {
                let c = column(m, f);
                let coeff = eta_inner(&c, &v) * ETA[f];
                for p in 0..4 {
                    v[p] -= coeff * c[p];
                }
            }
            let n = eta_inner(&v, &v);
            // Column j must carry the metric sign ETA[j].
            if n * ETA[j] > best_norm {
                best_norm = n * ETA[j];
                best = Some(v);
            }
        }
        let v = best.expect("an eta-orthogonal complement always exists");
        let scale = best_norm.sqrt();
        real::set_column(m, j, &v.map(|x| x / scale));
        filled.push(j);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenericClassification {
    pub verdict: Verdict,
    /// `s1 + s2 + |s3|`.
    pub lhs: f64,
    pub s0: f64,
    /// Largest eigenvalue of `(1/4) sum s_i sigma_i (x) sigma_i`, to compare with `s0 / 2`.
    pub max_lambda_unnormalized: f64,
}

/// Separable iff `s1 + s2 + |s3| <= s0`.
pub fn classify_generic(s: &[f64; 4]) -> GenericClassification {
    let lhs = s[1].abs() + s[2].abs() + s[3].abs();
    let [s0, s1, s2, s3] = *s;
    let lam = [
        s0 - s1 - s2 - s3,
        s0 + s1 + s2 - s3,
        s0 + s1 - s2 + s3,
        s0 - s1 + s2 + s3,
    ];
    GenericClassification {
        verdict: if lhs <= s0 + BOUNDARY_TOL { Verdict::Separable } else { Verdict::Entangled },
        lhs,
        s0,
        max_lambda_unnormalized: lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / 4.0,
    }
}

/// Ensemble for the normalized normal-form state `(1/4s0) sum s_i sigma_i (x) sigma_i`.
pub fn decompose_generic(s: &[f64; 4]) -> Result<SeparableDecomposition> {
    let t = [s[1] / s[0], s[2] / s[0], s[3] / s[0]];
    let form: f64 = t.iter().map(|x| x.abs()).sum();
    if !(s[0] > 0.0) || form > 1.0 + BOUNDARY_TOL {
        return Err(Error::NotCertifiedSeparable { form });
    }
    Ok(decompose_corr(&DiagonalCorrelation::from_diagonal(t))?
        .with_note("ensemble for the Lorentz normal-form state (A (x) B) rho (A (x) B)^dagger / N"))
}

/// Carries a normal-form certificate back to the state with coefficient
/// matrix `L1 Sigma L2^T` through the SL(2,C) lifts of `L1` and `L2`.
pub fn transfer_certificate(cert: &SeparableDecomposition, factors: &LorentzFactors) -> Result<SeparableDecomposition> {
    let lift = |l: &Mat4| {
        lift_to_sl2c(l).ok_or_else(|| Error::NormalFormFailure("factor has no SL(2,C) lift".into()))
    };
    let ops = [lift(&factors.l1)?, lift(&factors.l2)?];
    let mut out = cert.map_local(&ops);
    out.frame_note = Some("mapped from the Lorentz normal form by local SL(2,C) operators".into());
    Ok(out)
}
