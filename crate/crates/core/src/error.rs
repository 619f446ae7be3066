use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    BadDimension {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("unsupported qubit count {0} (expected 1, 2 or 3)")]
    BadQubitCount(usize),
    #[error("matrix is not Hermitian (max |m - m^dagger| = {violation:e})")]
    NotHermitian { violation: f64 },
    #[error("trace is {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("subsystem {index} out of range for {n_qubits} qubits")]
    BadSubsystem { index: usize, n_qubits: usize },
    #[error("rejection sampling gave up after {attempts} attempts")]
    RejectionLimit { attempts: usize },
    #[error("state has local Bloch vectors (|r| = {r_norm:e}, |s| = {s_norm:e})")]
    NotCorrelationOnly { r_norm: f64, s_norm: f64 },
    #[error("spectrum sums to {sum}, expected 1")]
    BadSpectrum { sum: f64 },
    #[error("coefficients do not describe a positive state (smallest eigenvalue {min_eigenvalue:e})")]
    InvalidState { min_eigenvalue: f64 },
    #[error("separability form {form} exceeds 1; no certificate can be built")]
    NotCertifiedSeparable { form: f64 },
    #[error("correlation matrix is not diagonal (max off-diagonal {off_diagonal:e})")]
    TNotDiagonal { off_diagonal: f64 },
    #[error("Lorentz normal form failed: {0}")]
    NormalFormFailure(String),
    #[error("criteria disagree: {0}")]
    InconsistentCriteria(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: certificate is {certificate}-dimensional, target is {target}-dimensional")]
    DimensionMismatch { certificate: usize, target: usize },
}
