//! JSON form of separable ensembles and their verification reports.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use sepkit_core::decomposition::{ProductTerm, SeparableDecomposition, VerificationReport};

use crate::state::{matrix_from_json, matrix_to_json, MatrixJson};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub weight: f64,
    pub factors: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateJson {
    pub qubits: usize,
    pub frame_note: Option<String>,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationJson {
    pub residual_max_abs: f64,
    pub weight_sum_error: f64,
    pub worst_factor_violation: f64,
    pub min_weight: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Contents of a `decompose --out` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub tool_version: String,
    pub input_digest: String,
    pub certificate: CertificateJson,
    pub verification: VerificationJson,
}

impl From<&VerificationReport> for VerificationJson {
    fn from(r: &VerificationReport) -> Self {
        VerificationJson {
            residual_max_abs: r.residual_max_abs,
            weight_sum_error: r.weight_sum_error,
            worst_factor_violation: r.worst_factor_violation,
            min_weight: r.min_weight,
            tolerance: r.tolerance,
            passed: r.passed,
        }
    }
}

impl From<&SeparableDecomposition> for CertificateJson {
    fn from(d: &SeparableDecomposition) -> Self {
        CertificateJson {
            qubits: d.n_qubits,
            frame_note: d.frame_note.clone(),
            terms: d
                .terms
                .iter()
                .map(|t| TermJson {
                    weight: t.weight,
                    factors: t.factors.iter().map(matrix_to_json).collect(),
                })
                .collect(),
        }
    }
}

impl CertificateJson {
    pub fn to_decomposition(&self) -> anyhow::Result<SeparableDecomposition> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (j, t) in self.terms.iter().enumerate() {
            if t.factors.len() != self.qubits {
                bail!("term {j} has {} factors for {} qubits", t.factors.len(), self.qubits);
            }
            let factors = t.factors.iter().map(matrix_from_json).collect::<anyhow::Result<Vec<_>>>()?;
            if factors.iter().any(|f| f.rows() != 2) {
                bail!("term {j} has a factor that is not 2x2");
            }
            terms.push(ProductTerm {
                weight: t.weight,
                factors,
            });
        }
        Ok(SeparableDecomposition {
            n_qubits: self.qubits,
            terms,
            frame_note: self.frame_note.clone(),
        })
    }
}

impl CertificateFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates always serialize")
    }

    pub fn load(path: &Path) -> anyhow::Result<CertificateFile> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text).context("malformed certificate file")
    }
}
