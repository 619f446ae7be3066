//! Seeded ensemble studies: sample states of one kind, analyze each, tabulate.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use sepkit_core::density::{random_correlation_only, random_mixed, random_separable};
use sepkit_core::sep3_correlation::MinimizeConfig;
use sepkit_core::{derive_seed, Error, Result, Verdict};

use crate::analysis::{analyze, AnalyzeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    /// Full-rank Gaussian-factor mixed states.
    Mixed,
    /// Random mixtures of pure product states.
    Separable,
    /// Two-qubit correlation-only states.
    Corr2,
    /// Three-qubit three-body-only states.
    Corr3,
}

pub const DEFAULT_CORR2_SCALE: f64 = 1.0;
pub const DEFAULT_CORR3_SCALE: f64 = 0.12;
pub const DEFAULT_SEPARABLE_TERMS: usize = 4;
pub const DEFAULT_RESTARTS: usize = 4;
pub const DEFAULT_MAX_ITERS: usize = 500;

/// Per-sample CSV columns, in order. `micros` is appended only with timings.
pub const COLUMNS: [&str; 14] = [
    "index",
    "sample_seed",
    "verdict",
    "route",
    "ph_min",
    "ph_outcome",
    "form_name",
    "form_before",
    "form_after",
    "form_outcome",
    "lambda_max",
    "lambda_outcome",
    "certificate_terms",
    "residual",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub kind: Kind,
    pub count: usize,
    pub seed: u64,
    /// Ignored for the correlation kinds, which fix the qubit count.
    pub qubits: usize,
    pub scale: Option<f64>,
    pub terms: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub timings: bool,
}

impl EnsembleConfig {
    pub fn new(kind: Kind, count: usize, seed: u64) -> Self {
        EnsembleConfig {
            kind,
            count,
            seed,
            qubits: 2,
            scale: None,
            terms: DEFAULT_SEPARABLE_TERMS,
            restarts: DEFAULT_RESTARTS,
            max_iters: DEFAULT_MAX_ITERS,
            timings: false,
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self.kind {
            Kind::Corr2 => 2,
            Kind::Corr3 => 3,
            _ => self.qubits,
        }
    }

    fn scale(&self) -> f64 {
        self.scale.unwrap_or(match self.kind {
            Kind::Corr3 => DEFAULT_CORR3_SCALE,
            _ => DEFAULT_CORR2_SCALE,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub index: usize,
    pub sample_seed: u64,
    pub verdict: String,
    pub route: String,
    pub ph_min: Option<f64>,
    pub ph_outcome: String,
    pub form_name: String,
    pub form_before: Option<f64>,
    pub form_after: Option<f64>,
    pub form_outcome: String,
    pub lambda_max: Option<f64>,
    pub lambda_outcome: String,
    pub certificate_terms: Option<usize>,
    pub residual: Option<f64>,
    pub micros: Option<u128>,
    /// Why the sample could not be drawn or analyzed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub separable: usize,
    pub entangled: usize,
    pub indeterminate: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub rows: Vec<Row>,
    pub counts: Counts,
}

fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

const FORM_CRITERIA: [&str; 5] = ["sum_abs_t", "sum_abs_g", "lorentz_generic", "sufficient_bloch", "product_residual"];

fn sample_row(cfg: &EnsembleConfig, index: usize) -> Row {
    let sample_seed = derive_seed(cfg.seed, index as u64);
    let mut row = Row {
        index,
        sample_seed,
        verdict: String::new(),
        route: String::new(),
        ph_min: None,
        ph_outcome: String::new(),
        form_name: String::new(),
        form_before: None,
        form_after: None,
        form_outcome: String::new(),
        lambda_max: None,
        lambda_outcome: String::new(),
        certificate_terms: None,
        residual: None,
        micros: None,
        error: None,
    };
    let start = Instant::now();
    let outcome = draw(cfg, sample_seed).and_then(|rho| {
        let opts = AnalyzeOptions {
            cut: None,
            minimize: MinimizeConfig {
                restarts: cfg.restarts,
                max_iters: cfg.max_iters,
                seed: sample_seed,
                ..MinimizeConfig::default()
            },
        };
        analyze(&rho, &opts)
    });
    if cfg.timings {
        row.micros = Some(start.elapsed().as_micros());
    }
    match outcome {
        Ok(a) => {
            row.verdict = a.verdict.as_str().into();
            row.route = a.route.as_ref().map(label).unwrap_or_default();
            row.ph_min = Some(a.ph_min);
            row.ph_outcome = (if a.ph_min < -sepkit_core::density::PSD_TOL { "entangled" } else { "ppt" }).into();
            if let Some(c) = FORM_CRITERIA.iter().find_map(|n| a.criterion(n)) {
                row.form_name = c.name.clone();
                row.form_before = Some(c.value);
                row.form_outcome = label(&c.outcome);
            }
            if let Some(c) = a.criterion("sum_abs_g_minimized") {
                row.form_after = Some(c.value);
                row.form_outcome = label(&c.outcome);
            }
            if let Some(c) = a.criterion("lambda_max") {
                row.lambda_max = Some(c.value);
                row.lambda_outcome = label(&c.outcome);
            }
            row.certificate_terms = a.certificate.as_ref().map(|d| d.len());
            row.residual = a.verification.filter(|v| v.passed).map(|v| v.residual_max_abs);
        }
        Err(e) => {
            row.verdict = "Error".into();
            row.error = Some(e.to_string());
        }
    }
    row
}

fn draw(cfg: &EnsembleConfig, seed: u64) -> Result<sepkit_core::density::DensityMatrix> {
    let n = cfg.n_qubits();
    match cfg.kind {
        Kind::Mixed => random_mixed(n, 1 << n, seed),
        Kind::Separable => random_separable(n, cfg.terms, seed).map(|(rho, _)| rho),
        Kind::Corr2 | Kind::Corr3 => random_correlation_only(n, cfg.scale(), seed),
    }
}

pub fn run(cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    if !(1..=3).contains(&cfg.n_qubits()) {
        return Err(Error::BadQubitCount(cfg.n_qubits()));
    }
    let rows: Vec<Row> = (0..cfg.count).into_par_iter().map(|i| sample_row(cfg, i)).collect();
    let mut counts = Counts::default();
    for r in &rows {
        match r.verdict.as_str() {
            v if v == Verdict::Separable.as_str() => counts.separable += 1,
            v if v == Verdict::Entangled.as_str() => counts.entangled += 1,
            v if v == Verdict::Indeterminate.as_str() => counts.indeterminate += 1,
            _ => counts.errors += 1,
        }
    }
    Ok(EnsembleResult { rows, counts })
}

impl Counts {
    pub fn total(&self) -> usize {
        self.separable + self.entangled + self.indeterminate + self.errors
    }

    /// The `#`-prefixed aggregate line that ends every CSV.
    pub fn aggregate_line(&self) -> String {
        let n = self.total().max(1) as f64;
        format!(
            "# count={} separable={} entangled={} indeterminate={} errors={} frac_separable={} frac_entangled={} frac_indeterminate={}",
            self.total(),
            self.separable,
            self.entangled,
            self.indeterminate,
            self.errors,
            self.separable as f64 / n,
            self.entangled as f64 / n,
            self.indeterminate as f64 / n,
        )
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

pub fn write_csv<W: Write>(result: &EnsembleResult, timings: bool, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = COLUMNS.to_vec();
    if timings {
        header.push("micros");
    }
    w.write_record(&header)?;
    for r in &result.rows {
        let mut rec = vec![
            r.index.to_string(),
            r.sample_seed.to_string(),
            r.verdict.clone(),
            r.route.clone(),
            opt(&r.ph_min),
            r.ph_outcome.clone(),
            r.form_name.clone(),
            opt(&r.form_before),
            opt(&r.form_after),
            r.form_outcome.clone(),
            opt(&r.lambda_max),
            r.lambda_outcome.clone(),
            opt(&r.certificate_terms),
            opt(&r.residual),
        ];
        if timings {
            rec.push(opt(&r.micros));
        }
        w.write_record(&rec)?;
    }
    let mut inner = w.into_inner().map_err(|e| e.into_error())?;
    writeln!(inner, "{}", result.counts.aggregate_line())
}
