//! `ReportFile`: the JSON document printed by `analyze` and `decompose`.

use serde::Serialize;

use sepkit_core::sep3_correlation::MinimizeResult;

use crate::analysis::{Analysis, Criterion, Route};
use crate::certificate::{CertificateJson, VerificationJson};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizationJson {
    pub before: f64,
    pub after: f64,
    /// ZYZ Euler angles of the three local rotations.
    pub angles: [f64; 9],
    pub restart: Option<usize>,
}

impl From<&MinimizeResult> for MinimizationJson {
    fn from(m: &MinimizeResult) -> Self {
        MinimizationJson {
            before: m.initial_value,
            after: m.value,
            angles: m.triple.angles(),
            restart: m.restart,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportFile {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub input_digest: String,
    pub qubits: usize,
    pub verdict: &'static str,
    pub route: Option<Route>,
    pub criteria: Vec<Criterion>,
    pub certificate: Option<CertificateJson>,
    pub verification: Option<VerificationJson>,
    pub minimization: Option<MinimizationJson>,
    pub notes: Vec<String>,
}

impl ReportFile {
    pub fn new(a: &Analysis, input_digest: &str) -> ReportFile {
        ReportFile {
            tool: "sepkit",
            tool_version: TOOL_VERSION,
            input_digest: input_digest.into(),
            qubits: a.n_qubits,
            verdict: a.verdict.as_str(),
            route: a.route,
            criteria: a.criteria.clone(),
            certificate: a.certificate.as_ref().map(CertificateJson::from),
            verification: a.verification.as_ref().map(VerificationJson::from),
            minimization: a.minimization.as_ref().map(MinimizationJson::from),
            notes: a.notes.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}
