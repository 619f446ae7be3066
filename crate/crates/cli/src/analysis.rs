//! Runs every applicable criterion on a validated state and assembles a verdict.

use serde::Serialize;

use sepkit_core::decomposition::{verify_matrix, ProductTerm, SeparableDecomposition, VerificationReport, DEFAULT_RESIDUAL_TOL};
use sepkit_core::density::{ph_test, validate, DensityMatrix, PtReport, PSD_TOL};
use sepkit_core::linalg::{kron_all, real, ComplexMatrix};
use sepkit_core::pauli::{bloch_state, g_from_matrix, hs2_from_matrix, pauli_expectation, Hs2};
use sepkit_core::sep2_correlation::{classify_corr, decompose_corr, diagonalize_matrix, diagonalize_t, BOUNDARY_TOL, CORRELATION_ONLY_TOL};
use sepkit_core::sep2_general::{
    classify_generic, decompose_generic, lorentz_normal_form, sufficient_decompose_general, transfer_certificate, SigmaForm,
};
use sepkit_core::sep3_correlation::{classify3, MinimizeConfig, MinimizeResult, FORM_TOL};
use sepkit_core::{Error, Result, Verdict};

/// Largest residual at which a three-qubit state counts as correlation-only.
pub const G_RESIDUAL_TOL: f64 = 1e-10;
/// Largest `max |rho - rho_1 (x) ... (x) rho_n|` accepted as a product state.
pub const PRODUCT_TOL: f64 = 1e-12;
/// Disagreements between criteria closer than this to their thresholds are
/// treated as rounding, not as a contradiction.
pub const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Separable,
    Entangled,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub outcome: Outcome,
}

/// Which construction produced the certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    SingleQubit,
    Correlation,
    SufficientBloch,
    LorentzGeneric,
    ThreeBody,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalyzeOptions {
    /// Restricts the reported partial-transpose criteria to one subsystem.
    pub cut: Option<usize>,
    pub minimize: MinimizeConfig,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub n_qubits: usize,
    pub verdict: Verdict,
    pub criteria: Vec<Criterion>,
    pub certificate: Option<SeparableDecomposition>,
    pub route: Option<Route>,
    pub verification: Option<VerificationReport>,
    pub minimization: Option<MinimizeResult>,
    pub notes: Vec<String>,
    /// Smallest partial-transpose eigenvalue over every single-qubit cut.
    pub ph_min: f64,
}

impl Analysis {
    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }
}

fn separable_if(ok: bool, otherwise: Outcome) -> Outcome {
    if ok {
        Outcome::Separable
    } else {
        otherwise
    }
}

fn ph_criterion(r: &PtReport, n_qubits: usize) -> Criterion {
    // For two qubits a positive partial transpose is also sufficient.
    let clean = if n_qubits == 2 { Outcome::Separable } else { Outcome::Inconclusive };
    Criterion {
        name: format!("ph_cut_{}", r.subsystem),
        value: r.min_eigenvalue,
        threshold: -PSD_TOL,
        outcome: if r.witnesses_entanglement() { Outcome::Entangled } else { clean },
    }
}

/// Single-qubit marginal of qubit `k`.
fn marginal(m: &ComplexMatrix, n_qubits: usize, k: usize) -> ComplexMatrix {
    let bloch = std::array::from_fn(|i| {
        let mut labels = vec![0; n_qubits];
        labels[k] = i + 1;
        pauli_expectation(m, &labels)
    });
    bloch_state(&bloch)
}

/// The product of the marginals, and how far the state is from it.
fn product_check(m: &ComplexMatrix, n_qubits: usize) -> (SeparableDecomposition, f64) {
    let factors: Vec<ComplexMatrix> = (0..n_qubits).map(|k| marginal(m, n_qubits, k)).collect();
    let residual = kron_all(factors.iter()).max_abs_diff(m);
    let d = SeparableDecomposition {
        n_qubits,
        terms: vec![ProductTerm { weight: 1.0, factors }],
        frame_note: None,
    };
    (d, residual)
}

struct Builder {
    n_qubits: usize,
    criteria: Vec<Criterion>,
    certificate: Option<(SeparableDecomposition, Route)>,
    minimization: Option<MinimizeResult>,
    notes: Vec<String>,
    ph_reports: Vec<PtReport>,
    cut: Option<usize>,
}

impl Builder {
    fn new(rho: &DensityMatrix, cut: Option<usize>) -> Result<Builder> {
        let n = rho.n_qubits();
        if let Some(k) = cut {
            if k >= n {
                return Err(Error::BadSubsystem { index: k, n_qubits: n });
            }
        }
        Ok(Builder {
            n_qubits: n,
            criteria: Vec::new(),
            certificate: None,
            minimization: None,
            notes: Vec::new(),
            ph_reports: (0..n).filter(|_| n > 1).map(|k| ph_test(rho, k)).collect::<Result<_>>()?,
            cut,
        })
    }

    fn ph_min(&self) -> f64 {
        self.ph_reports.iter().map(|r| r.min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    fn ph_entangled(&self) -> bool {
        self.ph_reports.iter().any(PtReport::witnesses_entanglement)
    }

    fn push(&mut self, name: &str, value: f64, threshold: f64, outcome: Outcome) {
        self.criteria.push(Criterion {
            name: name.into(),
            value,
            threshold,
            outcome,
        });
    }

    fn try_product(&mut self, m: &ComplexMatrix) {
        let (d, residual) = product_check(m, self.n_qubits);
        let ok = residual <= PRODUCT_TOL;
        self.push("product_residual", residual, PRODUCT_TOL, separable_if(ok, Outcome::Inconclusive));
        if ok {
            self.certificate = Some((d.with_note("product of the single-qubit marginals"), Route::Product));
        }
    }

    fn finish(mut self, m: &ComplexMatrix) -> Result<Analysis> {
        let ph_min = if self.ph_reports.is_empty() { 0.0 } else { self.ph_min() };
        let entangled = self.ph_entangled();
        let mut ph_criteria: Vec<Criterion> = self
            .ph_reports
            .iter()
            .filter(|r| self.cut.is_none_or(|k| k == r.subsystem))
            .map(|r| ph_criterion(r, self.n_qubits))
            .collect();
        if let Some(k) = self.cut {
            if entangled && !self.ph_reports[k].witnesses_entanglement() {
                self.notes.push(format!("cut {k} is clean; entanglement is witnessed on another cut"));
            }
        }
        ph_criteria.append(&mut self.criteria);

        let mut verification = None;
        let mut certificate = None;
        let mut route = None;
        if let Some((d, r)) = self.certificate.take() {
            let report = verify_matrix(&d, m, DEFAULT_RESIDUAL_TOL)?;
            verification = Some(report);
            if report.passed {
                certificate = Some(d);
                route = Some(r);
            } else {
                self.notes.push(format!(
                    "candidate certificate failed verification (residual {:e}); discarded",
                    report.residual_max_abs
                ));
            }
        }
        let verdict = match (&certificate, entangled) {
            (Some(_), true) => {
                return Err(Error::InconsistentCriteria(format!(
                    "verified certificate but partial-transpose eigenvalue {ph_min}"
                )))
            }
            (Some(_), false) => Verdict::Separable,
            (None, true) => Verdict::Entangled,
            (None, false) => {
                self.notes.push("positive partial transpose on every cut, but no certificate was constructed".into());
                Verdict::Indeterminate
            }
        };
        Ok(Analysis {
            n_qubits: self.n_qubits,
            verdict,
            criteria: ph_criteria,
            certificate,
            route,
            verification,
            minimization: self.minimization,
            notes: self.notes,
            ph_min,
        })
    }
}

/// Validates `m` as an `n_qubits` density matrix and analyzes it.
pub fn analyze_matrix(m: &ComplexMatrix, n_qubits: usize, opts: &AnalyzeOptions) -> Result<Analysis> {
    let rho = validate(m, n_qubits)?;
    analyze(&rho, opts)
}

pub fn analyze(rho: &DensityMatrix, opts: &AnalyzeOptions) -> Result<Analysis> {
    let m = rho.matrix();
    let mut b = Builder::new(rho, opts.cut)?;
    match rho.n_qubits() {
        1 => {
            let d = SeparableDecomposition {
                n_qubits: 1,
                terms: vec![ProductTerm {
                    weight: 1.0,
                    factors: vec![m.clone()],
                }],
                frame_note: None,
            };
            b.certificate = Some((d, Route::SingleQubit));
        }
        2 => analyze_two(m, &mut b)?,
        _ => analyze_three(m, &mut b, &opts.minimize)?,
    }
    b.finish(m)
}

fn disagrees(separable_margin: f64, ph_min: f64) -> bool {
    let by_criterion = separable_margin >= 0.0;
    let by_ph = ph_min >= -PSD_TOL;
    by_criterion != by_ph && separable_margin.abs() > BOUNDARY_BAND && (ph_min + PSD_TOL).abs() > BOUNDARY_BAND
}

fn analyze_two(m: &ComplexMatrix, b: &mut Builder) -> Result<()> {
    let hs = hs2_from_matrix(m);
    let ph_min = b.ph_min();
    if real::norm(&hs.r) <= CORRELATION_ONLY_TOL && real::norm(&hs.s) <= CORRELATION_ONLY_TOL {
        let d = diagonalize_t(&hs)?;
        let c = classify_corr(&d.t)?;
        let outcome = if c.verdict == Verdict::Separable { Outcome::Separable } else { Outcome::Entangled };
        b.push("sum_abs_t", c.form, 1.0, outcome);
        b.push("lambda_max", c.max_lambda, 0.5, outcome);
        if disagrees(1.0 + BOUNDARY_TOL - c.form, ph_min) {
            return Err(Error::InconsistentCriteria(format!(
                "sum|t| = {} but input partial-transpose eigenvalue {ph_min}",
                c.form
            )));
        }
        if c.verdict == Verdict::Separable {
            b.certificate = Some((decompose_corr(&d)?, Route::Correlation));
        }
        return Ok(());
    }

    let d = diagonalize_matrix(&hs.t);
    let rotated = Hs2 {
        r: d.o_a.transpose().apply(&hs.r),
        s: d.o_b.transpose().apply(&hs.s),
        t: real::diag(d.t),
    };
    let value = real::norm(&rotated.r) + real::norm(&rotated.s) + d.t.iter().map(|x| x.abs()).sum::<f64>();
    let sufficient = sufficient_decompose_general(&rotated)?;
    b.push("sufficient_bloch", value, 1.0, separable_if(sufficient.is_some(), Outcome::Inconclusive));
    if let Some(cert) = sufficient {
        let cert = cert
            .map_local(&[d.o_a.to_unitary(), d.o_b.to_unitary()])
            .with_note("built in the frame that diagonalizes t and rotated back to the input frame");
        b.certificate = Some((cert, Route::SufficientBloch));
        return Ok(());
    }

    match lorentz_normal_form(&hs.r_matrix()) {
        Ok(f) => match f.sigma {
            SigmaForm::Generic { s } => {
                let g = classify_generic(&s);
                let ratio = g.lhs / g.s0;
                let separable = g.verdict == Verdict::Separable;
                b.push("lorentz_generic", ratio, 1.0, separable_if(separable, Outcome::Entangled));
                if disagrees(1.0 + BOUNDARY_TOL - ratio, ph_min) {
                    return Err(Error::InconsistentCriteria(format!(
                        "(s1 + s2 + |s3|) / s0 = {ratio} but partial-transpose eigenvalue {ph_min}"
                    )));
                }
                if separable {
                    let cert = transfer_certificate(&decompose_generic(&s)?, &f)?;
                    b.certificate = Some((cert, Route::LorentzGeneric));
                    return Ok(());
                }
            }
            SigmaForm::NonGeneric { a, b: bb, c, d } => {
                let why = f.note.map(|n| format!(" ({n})")).unwrap_or_default();
                b.notes.push(format!(
                    "Lorentz normal form is non-generic{why}: a = {a}, b = {bb}, c = {c}, d = {d}; no certificate is constructed"
                ));
            }
        },
        Err(e) => b.notes.push(format!("{e}")),
    }
    if !b.ph_entangled() {
        b.try_product(m);
    }
    Ok(())
}

fn analyze_three(m: &ComplexMatrix, b: &mut Builder, cfg: &MinimizeConfig) -> Result<()> {
    let (g, residual) = g_from_matrix(m);
    if residual <= G_RESIDUAL_TOL {
        let cls = classify3(&g, cfg)?;
        let before_ok = cls.form_before <= 1.0 + FORM_TOL;
        b.push("sum_abs_g", cls.form_before, 1.0, separable_if(before_ok, Outcome::Inconclusive));
        if let Some(min) = cls.minimization {
            let after_ok = min.value <= 1.0 + FORM_TOL;
            b.push("sum_abs_g_minimized", min.value, 1.0, separable_if(after_ok, Outcome::Inconclusive));
        }
        b.minimization = cls.minimization;
        if let Some(cert) = cls.certificate {
            b.certificate = Some((cert, Route::ThreeBody));
            return Ok(());
        }
    } else {
        b.notes.push(format!(
            "state has one- or two-qubit Pauli terms (max |coefficient| {residual:e}); the three-body criterion does not apply"
        ));
    }
    if !b.ph_entangled() {
        b.try_product(m);
    }
    Ok(())
}
