//! `StateFile` input: a density matrix, either explicit or by Pauli coefficients.

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sepkit_core::linalg::{real, ComplexMatrix};
use sepkit_core::pauli::{bloch_state, g_reconstruct, hs2_reconstruct, GTensor, Hs2};

/// Row-major matrix of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<[[[f64; 3]; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Coefficients>,
}

/// A parsed state file together with the digest of its bytes.
#[derive(Debug, Clone)]
pub struct LoadedState {
    pub n_qubits: usize,
    /// Not yet validated as a density matrix.
    pub matrix: ComplexMatrix,
    pub digest: String,
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> anyhow::Result<ComplexMatrix> {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            bail!("matrix row {i} has {} entries, expected {n}", row.len());
        }
        for &[re, im] in row {
            if !(re.is_finite() && im.is_finite()) {
                bail!("matrix entries must be finite");
            }
            data.push(Complex64::new(re, im));
        }
    }
    Ok(ComplexMatrix::from_vec(n, n, data))
}

fn check_finite(values: impl IntoIterator<Item = f64>) -> anyhow::Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        bail!("coefficients must be finite")
    }
}

impl StateFile {
    pub fn parse(text: &str) -> anyhow::Result<StateFile> {
        serde_json::from_str(text).context("malformed state file")
    }

    pub fn from_matrix(n_qubits: usize, m: &ComplexMatrix) -> StateFile {
        StateFile {
            qubits: n_qubits,
            matrix: Some(matrix_to_json(m)),
            coefficients: None,
        }
    }

    pub fn from_g(g: &GTensor) -> StateFile {
        StateFile {
            qubits: 3,
            matrix: None,
            coefficients: Some(Coefficients {
                g: Some(g.0),
                ..Default::default()
            }),
        }
    }

    pub fn from_hs2(hs: &Hs2) -> StateFile {
        StateFile {
            qubits: 2,
            matrix: None,
            coefficients: Some(Coefficients {
                t: Some(hs.t),
                r: Some(hs.r),
                s: Some(hs.s),
                g: None,
            }),
        }
    }

    /// The operator described by the file. Shape errors are reported here;
    /// density-matrix validity is checked by the caller.
    pub fn to_matrix(&self) -> anyhow::Result<ComplexMatrix> {
        if !(1..=3).contains(&self.qubits) {
            bail!("unsupported qubit count {} (expected 1, 2 or 3)", self.qubits);
        }
        match (&self.matrix, &self.coefficients) {
            (Some(rows), None) => matrix_from_json(rows),
            (None, Some(c)) => self.coefficient_matrix(c),
            _ => bail!("exactly one of \"matrix\" and \"coefficients\" must be present"),
        }
    }

    fn coefficient_matrix(&self, c: &Coefficients) -> anyhow::Result<ComplexMatrix> {
        let zero = [0.0; 3];
        match self.qubits {
            1 => {
                if c.t.is_some() || c.g.is_some() || c.s.is_some() {
                    bail!("a one-qubit coefficient file takes only \"r\"");
                }
                let r = c.r.unwrap_or(zero);
                check_finite(r)?;
                Ok(bloch_state(&r))
            }
            2 => {
                if c.g.is_some() {
                    bail!("\"g\" applies to three qubits only");
                }
                let hs = Hs2 {
                    r: c.r.unwrap_or(zero),
                    s: c.s.unwrap_or(zero),
                    t: c.t.unwrap_or(real::diag(zero)),
                };
                check_finite(hs.r.into_iter().chain(hs.s).chain(hs.t.into_iter().flatten()))?;
                Ok(hs2_reconstruct(&hs))
            }
            _ => {
                if c.t.is_some() || c.r.is_some() || c.s.is_some() {
                    bail!("three-qubit coefficient files take only \"g\"");
                }
                let g = c.g.ok_or_else(|| anyhow!("three-qubit coefficient file needs \"g\""))?;
                check_finite(g.into_iter().flatten().flatten())?;
                Ok(g_reconstruct(&GTensor(g)))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state files always serialize")
    }
}

pub fn load(path: &Path) -> anyhow::Result<LoadedState> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).context("state file is not UTF-8")?;
    let file = StateFile::parse(text)?;
    let matrix = file.to_matrix()?;
    Ok(LoadedState {
        n_qubits: file.qubits,
        matrix,
        digest: digest(&bytes),
    })
}
