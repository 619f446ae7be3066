//! Subcommand definitions and their exit-code contract.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sepkit_core::decomposition::{verify_matrix, DEFAULT_RESIDUAL_TOL};
use sepkit_core::density::validate;
use sepkit_core::pauli::g_from_matrix;
use sepkit_core::sep3_correlation::{minimize_sep_form, MinimizeConfig, FORM_TOL};
use sepkit_core::{Error, Verdict};

use crate::analysis::{analyze, AnalyzeOptions, G_RESIDUAL_TOL};
use crate::certificate::{CertificateFile, CertificateJson, VerificationJson};
use crate::ensemble::{self, EnsembleConfig, Kind};
use crate::report::{ReportFile, TOOL_VERSION};
use crate::state::{load, LoadedState};

pub const EXIT_SEPARABLE: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_NOT_DENSITY: u8 = 2;
pub const EXIT_ENTANGLED: u8 = 3;
pub const EXIT_INDETERMINATE: u8 = 4;
pub const EXIT_INCONSISTENT: u8 = 5;

const EXIT_CODES: &str = "Exit codes: 0 Separable, 3 Entangled, 4 Indeterminate, \
2 input is not a density matrix (or not of the required form), 1 I/O or parse error, \
5 criteria contradicted each other.";

const ENSEMBLE_HELP: &str = "CSV columns, in order: index, sample_seed, verdict (Separable, Entangled, \
Indeterminate or Error), route (construction behind the certificate), ph_min (smallest \
partial-transpose eigenvalue over all single-qubit cuts), ph_outcome (entangled or ppt), \
form_name (criterion shown in the form columns: sum_abs_t, sum_abs_g, lorentz_generic, \
sufficient_bloch or product_residual), form_before, form_after (three-body form after local \
rotations), form_outcome, lambda_max and lambda_outcome (two-qubit correlation states only), \
certificate_terms, residual (verified reconstruction error), and micros (wall time, only with \
--timings). Empty cells mean not applicable. The last line starts with '#' and holds counts and \
fractions per verdict.\n\nSampling: mixed = G G^dagger / tr for a full-rank complex Gaussian G; \
separable = exponential-weight mixture of --terms random pure product states; corr2 / corr3 = \
correlation coefficients uniform in [-scale, scale], resampled until positive (default scale 1 \
for corr2, 0.12 for corr3). Sample i uses a seed derived from --seed and i, so output does not \
depend on the thread count. Set SEPKIT_THREADS to cap parallelism (0 or unset = all cores). \
Three-qubit correlation states never fail the partial-transpose test: for them the partial \
transpose has exactly the spectrum of the state.";

#[derive(Debug, Parser)]
#[command(name = "sepkit", version, about = "Separability of two- and three-qubit states with explicit product-state certificates", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    /// Number of minimizer restarts.
    #[arg(long, default_value_t = MinimizeConfig::default().restarts)]
    pub restarts: usize,
    /// Seed for the random restarts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every applicable criterion and print a JSON report.
    #[command(after_help = EXIT_CODES)]
    Analyze {
        path: PathBuf,
        /// Report the partial-transpose test for this qubit only.
        #[arg(long)]
        cut: Option<usize>,
        #[command(flatten)]
        minimize: MinimizeArgs,
    },
    /// Like analyze, and also write the certificate to a file.
    #[command(after_help = "Exits 4 when no certificate can be constructed, even if the state is not provably entangled.")]
    Decompose {
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        minimize: MinimizeArgs,
    },
    /// Sample a seeded ensemble, analyze every state and write a CSV table.
    #[command(after_help = ENSEMBLE_HELP)]
    Ensemble {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Qubit count for the mixed and separable kinds.
        #[arg(long, default_value_t = 2)]
        qubits: usize,
        /// Coefficient range for the correlation kinds.
        #[arg(long)]
        scale: Option<f64>,
        /// Product terms per separable sample.
        #[arg(long, default_value_t = ensemble::DEFAULT_SEPARABLE_TERMS)]
        terms: usize,
        /// Minimizer restarts per three-qubit sample.
        #[arg(long, default_value_t = ensemble::DEFAULT_RESTARTS)]
        restarts: usize,
        /// Minimizer iterations per restart.
        #[arg(long, default_value_t = ensemble::DEFAULT_MAX_ITERS)]
        max_iters: usize,
        /// Append a wall-time column (makes the output nondeterministic).
        #[arg(long)]
        timings: bool,
    },
    /// Minimize the three-body separability form over local rotations.
    #[command(after_help = "Exits 2 if the input is not a three-qubit state with only three-body correlations.")]
    Minimize {
        path: PathBuf,
        #[command(flatten)]
        minimize: MinimizeArgs,
    },
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::BadDimension { .. }
        | Error::BadQubitCount(_)
        | Error::NotHermitian { .. }
        | Error::BadTrace { .. }
        | Error::NotPositive { .. }
        | Error::InvalidState { .. } => EXIT_NOT_DENSITY,
        Error::InconsistentCriteria(_) => EXIT_INCONSISTENT,
        _ => EXIT_IO,
    }
}

fn exit_for_verdict(v: Verdict) -> u8 {
    match v {
        Verdict::Separable => EXIT_SEPARABLE,
        Verdict::Entangled => EXIT_ENTANGLED,
        Verdict::Indeterminate => EXIT_INDETERMINATE,
    }
}

/// Output streams, injectable for tests.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

fn fail(io: &mut Io, code: u8, e: impl std::fmt::Display) -> u8 {
    let _ = writeln!(io.err, "sepkit: {e}");
    code
}

fn minimize_config(args: &MinimizeArgs) -> MinimizeConfig {
    MinimizeConfig {
        restarts: args.restarts,
        seed: args.seed,
        ..MinimizeConfig::default()
    }
}

fn load_or_fail(path: &Path, io: &mut Io) -> Result<LoadedState, u8> {
    load(path).map_err(|e| fail(io, EXIT_IO, format!("{e:#}")))
}

pub fn run(cli: &Cli, io: &mut Io) -> u8 {
    match &cli.command {
        Command::Analyze { path, cut, minimize } => {
            let opts = AnalyzeOptions {
                cut: *cut,
                minimize: minimize_config(minimize),
            };
            analyze_cmd(path, &opts, None, io)
        }
        Command::Decompose { path, out, minimize } => {
            let opts = AnalyzeOptions {
                cut: None,
                minimize: minimize_config(minimize),
            };
            analyze_cmd(path, &opts, Some(out), io)
        }
        Command::Ensemble {
            kind,
            count,
            seed,
            csv,
            qubits,
            scale,
            terms,
            restarts,
            max_iters,
            timings,
        } => {
            let cfg = EnsembleConfig {
                kind: *kind,
                count: *count,
                seed: *seed,
                qubits: *qubits,
                scale: *scale,
                terms: *terms,
                restarts: *restarts,
                max_iters: *max_iters,
                timings: *timings,
            };
            ensemble_cmd(&cfg, csv.as_deref(), io)
        }
        Command::Minimize { path, minimize } => minimize_cmd(path, &minimize_config(minimize), io),
    }
}

fn analyze_cmd(path: &Path, opts: &AnalyzeOptions, out: Option<&Path>, io: &mut Io) -> u8 {
    let state = match load_or_fail(path, io) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let rho = match validate(&state.matrix, state.n_qubits) {
        Ok(r) => r,
        Err(e) => return fail(io, exit_for(&e), e),
    };
    let a = match analyze(&rho, opts) {
        Ok(a) => a,
        Err(e) => return fail(io, exit_for(&e), e),
    };
    let report = ReportFile::new(&a, &state.digest);
    if writeln!(io.out, "{}", report.to_json()).is_err() {
        return EXIT_IO;
    }
    let Some(out) = out else {
        return exit_for_verdict(a.verdict);
    };
    match (&a.certificate, &a.verification) {
        (Some(cert), Some(v)) => {
            let file = CertificateFile {
                tool_version: TOOL_VERSION.into(),
                input_digest: state.digest.clone(),
                certificate: CertificateJson::from(cert),
                verification: VerificationJson::from(v),
            };
            if let Err(e) = std::fs::write(out, file.to_json()) {
                return fail(io, EXIT_IO, format!("cannot write {}: {e}", out.display()));
            }
            match reverify(out, &state) {
                Ok(true) => EXIT_SEPARABLE,
                Ok(false) => fail(io, EXIT_INDETERMINATE, "written certificate failed re-verification"),
                Err(e) => fail(io, EXIT_IO, format!("{e:#}")),
            }
        }
        _ => {
            let _ = writeln!(io.err, "sepkit: no certificate for verdict {}", a.verdict);
            match a.verdict {
                Verdict::Entangled => EXIT_ENTANGLED,
                _ => EXIT_INDETERMINATE,
            }
        }
    }
}

/// Reads a certificate file back and checks it against the state it certifies.
pub fn reverify(path: &Path, state: &LoadedState) -> anyhow::Result<bool> {
    let file = CertificateFile::load(path)?;
    let d = file.certificate.to_decomposition()?;
    let report = verify_matrix(&d, &state.matrix, DEFAULT_RESIDUAL_TOL).context("certificate does not match the state")?;
    Ok(report.passed && file.input_digest == state.digest)
}

fn ensemble_cmd(cfg: &EnsembleConfig, csv: Option<&Path>, io: &mut Io) -> u8 {
    let result = match ensemble::run(cfg) {
        Ok(r) => r,
        Err(e) => return fail(io, EXIT_IO, e),
    };
    for r in result.rows.iter().filter(|r| r.error.is_some()) {
        let _ = writeln!(io.err, "sepkit: sample {}: {}", r.index, r.error.as_deref().unwrap_or(""));
    }
    match csv {
        Some(p) => {
            let written = std::fs::File::create(p).and_then(|f| ensemble::write_csv(&result, cfg.timings, std::io::BufWriter::new(f)));
            if let Err(e) = written {
                return fail(io, EXIT_IO, format!("cannot write {}: {e}", p.display()));
            }
            let _ = writeln!(io.out, "{}", result.counts.aggregate_line());
        }
        None => {
            if let Err(e) = ensemble::write_csv(&result, cfg.timings, &mut *io.out) {
                return fail(io, EXIT_IO, e);
            }
        }
    }
    EXIT_SEPARABLE
}

#[derive(Debug, Serialize)]
struct MinimizeReport<'a> {
    tool_version: &'static str,
    input_digest: &'a str,
    before: f64,
    after: f64,
    /// ZYZ Euler angles (alpha, beta, gamma) for qubits A, B, C.
    angles: [f64; 9],
    restart: Option<usize>,
    restarts: usize,
    seed: u64,
    separable_after: bool,
}

fn minimize_cmd(path: &Path, cfg: &MinimizeConfig, io: &mut Io) -> u8 {
    let state = match load_or_fail(path, io) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if state.n_qubits != 3 {
        return fail(io, EXIT_NOT_DENSITY, "minimize needs a three-qubit state");
    }
    if let Err(e) = validate(&state.matrix, 3) {
        return fail(io, exit_for(&e), e);
    }
    let (g, residual) = g_from_matrix(&state.matrix);
    if residual > G_RESIDUAL_TOL {
        return fail(
            io,
            EXIT_NOT_DENSITY,
            format!("state has one- or two-qubit Pauli terms (max |coefficient| {residual:e})"),
        );
    }
    let m = minimize_sep_form(&g, cfg);
    let report = MinimizeReport {
        tool_version: TOOL_VERSION,
        input_digest: &state.digest,
        before: m.initial_value,
        after: m.value,
        angles: m.triple.angles(),
        restart: m.restart,
        restarts: cfg.restarts,
        seed: cfg.seed,
        separable_after: m.value <= 1.0 + FORM_TOL,
    };
    let text = serde_json::to_string_pretty(&report).expect("reports always serialize");
    if writeln!(io.out, "{text}").is_err() {
        return EXIT_IO;
    }
    EXIT_SEPARABLE
}
