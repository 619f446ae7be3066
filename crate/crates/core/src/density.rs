//! Validated density matrices, partial transposes and seeded random states.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Exp1, StandardNormal};

use crate::decomposition::{recombine, SeparableDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix, Vec3, ONE};
use crate::pauli::{g_reconstruct, hs2_reconstruct, GTensor, Hs2};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues at or above `-PSD_TOL` count as nonnegative everywhere in the crate.
pub const PSD_TOL: f64 = 1e-10;
pub const REJECTION_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix, n_qubits: usize) -> Result<Self> {
        validate(&m, n_qubits)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat).expect("validated matrices are Hermitian")
    }

    pub fn purity(&self) -> f64 {
        self.mat.matmul(&self.mat).trace().re
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        DensityMatrix {
            n_qubits,
            mat: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }
}

/// Checks shape, Hermiticity, unit trace and positivity, in that order.
pub fn validate(m: &ComplexMatrix, n_qubits: usize) -> Result<DensityMatrix> {
    if !(1..=3).contains(&n_qubits) {
        return Err(Error::BadQubitCount(n_qubits));
    }
    let dim = 1 << n_qubits;
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::BadDimension {
            expected: dim,
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let violation = m.hermiticity_violation();
    if !(violation <= HERMITICITY_TOL) {
        return Err(Error::NotHermitian { violation });
    }
    let trace = m.trace();
    if !((trace - ONE).norm() <= TRACE_TOL) {
        return Err(Error::BadTrace { trace: trace.re });
    }
    let min_eigenvalue = hermitian_eigenvalues(m)?[0];
    if min_eigenvalue < -PSD_TOL {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(DensityMatrix {
        n_qubits,
        mat: m.clone(),
    })
}

/// Transposes the indices of qubit `subsystem` (qubit 0 is the most significant bit).
pub fn partial_transpose(rho: &DensityMatrix, subsystem: usize) -> Result<ComplexMatrix> {
    partial_transpose_matrix(rho.matrix(), rho.n_qubits(), subsystem)
}

pub fn partial_transpose_matrix(m: &ComplexMatrix, n_qubits: usize, subsystem: usize) -> Result<ComplexMatrix> {
    if subsystem >= n_qubits {
        return Err(Error::BadSubsystem {
            index: subsystem,
            n_qubits,
        });
    }
    let dim = 1 << n_qubits;
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::BadDimension {
            expected: dim,
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let mask = 1 << (n_qubits - 1 - subsystem);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let (ii, jj) = if (i ^ j) & mask != 0 { (i ^ mask, j ^ mask) } else { (i, j) };
            out[(ii, jj)] = m[(i, j)];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtReport {
    pub subsystem: usize,
    /// Ascending.
    pub pt_eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
}

impl PtReport {
    /// A negative eigenvalue beyond the shared floor witnesses entanglement across this cut.
    pub fn witnesses_entanglement(&self) -> bool {
        self.min_eigenvalue < -PSD_TOL
    }
}

pub fn ph_test(rho: &DensityMatrix, subsystem: usize) -> Result<PtReport> {
    let pt = partial_transpose(rho, subsystem)?;
    let pt_eigenvalues = hermitian_eigenvalues(&pt)?;
    Ok(PtReport {
        subsystem,
        min_eigenvalue: pt_eigenvalues[0],
        pt_eigenvalues,
    })
}

/// The bipartite cuts worth testing: qubit B alone for two qubits (both
/// transposes share a spectrum), every single qubit for three.
pub fn ph_cuts(n_qubits: usize) -> Vec<usize> {
    match n_qubits {
        2 => vec![1],
        3 => vec![0, 1, 2],
        _ => Vec::new(),
    }
}

pub fn ph_all_cuts(rho: &DensityMatrix) -> Result<Vec<PtReport>> {
    ph_cuts(rho.n_qubits()).into_iter().map(|k| ph_test(rho, k)).collect()
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `G G^dagger / tr(G G^dagger)` for a seeded complex Gaussian `2^n x rank` matrix `G`.
pub fn random_mixed(n_qubits: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if !(1..=3).contains(&n_qubits) {
        return Err(Error::BadQubitCount(n_qubits));
    }
    let dim = 1 << n_qubits;
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!("rank {rank} must lie in 1..={dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_vec(dim, rank, (0..dim * rank).map(|_| complex_gaussian(&mut rng)).collect());
    let gg = g.matmul(&g.adjoint());
    let m = hermitize(&gg.scale(1.0 / gg.trace().re));
    validate(&m, n_qubits)
}

/// Averages `m` with its adjoint so rounding never breaks exact Hermiticity.
fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    let mut h = m.clone();
    h.add_scaled(&m.adjoint(), 1.0);
    h.scale(0.5)
}

/// Correlation-only state with coefficients uniform in `[-scale, scale]`,
/// resampled until positive.
pub fn random_correlation_only(n_qubits: usize, scale: f64, seed: u64) -> Result<DensityMatrix> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::InvalidArgument(format!("scale {scale} must lie in (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REJECTION_ATTEMPTS {
        let m = match n_qubits {
            2 => {
                let t = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-scale..=scale)));
                // Closed-form spectrum in the diagonal frame rejects cheaply.
                let d = crate::linalg::svd3(&t).d;
                if crate::sep2_correlation::spectra_from_t(&d).min_rho() < -PSD_TOL {
                    continue;
                }
                hs2_reconstruct(&Hs2::correlation_only(t))
            }
            3 => {
                let g = std::array::from_fn(|_| {
                    std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-scale..=scale)))
                });
                g_reconstruct(&GTensor(g))
            }
            n => return Err(Error::BadQubitCount(n)),
        };
        if let Ok(rho) = validate(&m, n_qubits) {
            return Ok(rho);
        }
    }
    Err(Error::RejectionLimit {
        attempts: REJECTION_ATTEMPTS,
    })
}

/// Uniformly random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v: Vec3 = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = crate::linalg::real::norm(&v);
        if n > 1e-8 {
            return v.map(|x| x / n);
        }
    }
}

/// Convex combination of random pure product states with flat-Dirichlet
/// weights, returned together with the ensemble that generated it.
pub fn random_separable(n_qubits: usize, n_terms: usize, seed: u64) -> Result<(DensityMatrix, SeparableDecomposition)> {
    if !(1..=3).contains(&n_qubits) {
        return Err(Error::BadQubitCount(n_qubits));
    }
    if n_terms == 0 {
        return Err(Error::InvalidArgument("at least one term is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<(f64, Vec<Vec3>)> = (0..n_terms)
        .map(|_| {
            let w: f64 = rng.sample(Exp1);
            let blochs = (0..n_qubits).map(|_| random_unit_vector(&mut rng)).collect();
            (w, blochs)
        })
        .collect();
    let d = SeparableDecomposition::from_bloch_terms(n_qubits, raw);
    let rho = validate(&hermitize(&recombine(&d)), n_qubits)?;
    Ok((rho, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use crate::pauli::{g_from_matrix, hs2_from_matrix, pauli};

    fn diagonal_fixture(t: [f64; 3]) -> ComplexMatrix {
        hs2_reconstruct(&Hs2::diagonal(t))
    }

    #[test]
    fn maximally_mixed_is_valid() {
        assert!(validate(&ComplexMatrix::identity(4).scale(0.25), 2).is_ok());
    }

    #[test]
    fn traceless_input_rejected() {
        let zz = kron(&pauli(3), &pauli(3)).scale(0.25);
        assert!(matches!(validate(&zz, 2), Err(Error::BadTrace { .. })));
    }

    #[test]
    fn unphysical_correlations_rejected() {
        match validate(&diagonal_fixture([1.0, 1.0, 1.0]), 2) {
            Err(Error::NotPositive { min_eigenvalue }) => assert!((min_eigenvalue + 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(validate(&ComplexMatrix::identity(4), 3), Err(Error::BadDimension { .. })));
        assert!(matches!(validate(&ComplexMatrix::identity(16), 4), Err(Error::BadQubitCount(4))));
        let mut m = ComplexMatrix::identity(2).scale(0.5);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(validate(&m, 1), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn partial_transpose_flips_t2() {
        let (t1, t2, t3) = (0.3, -0.2, 0.1);
        let rho = validate(&diagonal_fixture([t1, t2, t3]), 2).unwrap();
        let pt = partial_transpose(&rho, 1).unwrap();
        assert!(pt.max_abs_diff(&diagonal_fixture([t1, -t2, t3])) < 1e-16);
        let back = partial_transpose_matrix(&pt, 2, 1).unwrap();
        assert_eq!(&back, rho.matrix());
    }

    #[test]
    fn partial_transpose_fixed_point_and_range() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert_eq!(&partial_transpose(&rho, 0).unwrap(), rho.matrix());
        assert!(matches!(partial_transpose(&rho, 2), Err(Error::BadSubsystem { .. })));
    }

    #[test]
    fn ph_values() {
        let bell = validate(&diagonal_fixture([1.0, -1.0, 1.0]), 2).unwrap();
        assert!((ph_test(&bell, 1).unwrap().min_eigenvalue + 0.5).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((ph_test(&mixed, 1).unwrap().min_eigenvalue - 0.25).abs() < 1e-15);
        let werner = validate(&diagonal_fixture([-0.5; 3]), 2).unwrap();
        let report = ph_test(&werner, 1).unwrap();
        assert!((report.min_eigenvalue + 0.125).abs() < 1e-12);
        assert!((report.pt_eigenvalues.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn random_mixed_properties() {
        assert_eq!(random_mixed(2, 4, 1).unwrap(), random_mixed(2, 4, 1).unwrap());
        for seed in 0..20 {
            assert!((random_mixed(2, 1, seed).unwrap().purity() - 1.0).abs() < 1e-12);
        }
        assert!(random_mixed(2, 5, 0).is_err());
    }

    #[test]
    fn correlation_only_has_exact_zero_local_terms() {
        for seed in 0..50 {
            let rho = random_correlation_only(2, 0.5, seed).unwrap();
            let hs = hs2_from_matrix(rho.matrix());
            assert_eq!(hs.r, [0.0; 3]);
            assert_eq!(hs.s, [0.0; 3]);
            let rho3 = random_correlation_only(3, 0.2, seed).unwrap();
            assert_eq!(g_from_matrix(rho3.matrix()).1, 0.0);
        }
    }

    #[test]
    fn random_separable_is_ppt() {
        for seed in 0..50 {
            let (rho, d) = random_separable(2, 1 + (seed as usize % 5), seed).unwrap();
            assert!((d.weight_sum() - 1.0).abs() < 1e-12);
            assert!(ph_all_cuts(&rho).unwrap().iter().all(|r| !r.witnesses_entanglement()));
        }
        let (pure, _) = random_separable(3, 1, 7).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-12);
    }
}
