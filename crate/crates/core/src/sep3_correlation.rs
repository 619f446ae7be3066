//! Three-qubit states with only full three-body correlations,
//! `(I + sum G_abc sigma_a (x) sigma_b (x) sigma_c) / 8`.
//!
//! `sum |G_abc| <= 1` yields an explicit product ensemble. The sum is not
//! rotation invariant, so it is minimized over local rotations first.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decomposition::SeparableDecomposition;
use crate::density::{ph_all_cuts, validate, PtReport};
use crate::error::{Error, Result};
use crate::linalg::{real, so3_from_angles, symmetric_eigen, Mat3, Rot3, Vec3};
use crate::pauli::{g_reconstruct, GTensor};
use crate::verdict::Verdict;
use crate::derive_seed;

/// Slack on `sum |G| <= 1`.
pub const FORM_TOL: f64 = 1e-10;
/// Restarts are evaluated in blocks of this size; the result does not depend on it.
const RESTART_BLOCK: usize = 8;
const INITIAL_STEP: f64 = 0.4;

pub fn sep_form(g: &GTensor) -> f64 {
    g.iter().map(|(_, x)| x.abs()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationTriple {
    pub o_a: Rot3,
    pub o_b: Rot3,
    pub o_c: Rot3,
}

impl RotationTriple {
    pub const IDENTITY: RotationTriple = RotationTriple {
        o_a: Rot3::IDENTITY,
        o_b: Rot3::IDENTITY,
        o_c: Rot3::IDENTITY,
    };

    /// Three ZYZ angle triples, one per qubit.
    pub fn from_angles(x: &[f64; 9]) -> Self {
        RotationTriple {
            o_a: so3_from_angles(x[0], x[1], x[2]),
            o_b: so3_from_angles(x[3], x[4], x[5]),
            o_c: so3_from_angles(x[6], x[7], x[8]),
        }
    }

    pub fn angles(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for (k, r) in self.rotations().iter().enumerate() {
            let (a, b, c) = r.euler_zyz();
            out[3 * k..3 * k + 3].copy_from_slice(&[a, b, c]);
        }
        out
    }

    pub fn rotations(&self) -> [Rot3; 3] {
        [self.o_a, self.o_b, self.o_c]
    }

    /// `rotate_g(rotate_g(g, self), other) = rotate_g(g, self.then(other))`.
    pub fn then(&self, other: &RotationTriple) -> RotationTriple {
        RotationTriple {
            o_a: self.o_a.compose(&other.o_a),
            o_b: self.o_b.compose(&other.o_b),
            o_c: self.o_c.compose(&other.o_c),
        }
    }
}

/// `G'[i][j][k] = sum_abc o_a[a][i] o_b[b][j] o_c[c][k] G[a][b][c]`.
///
/// If `U_k` lifts `o_k`, the state of `G` equals `(U_a (x) U_b (x) U_c)`
/// applied by conjugation to the state of `G'`.
pub fn rotate_g(g: &GTensor, q: &RotationTriple) -> GTensor {
    let (a, b, c) = (q.o_a.matrix(), q.o_b.matrix(), q.o_c.matrix());
    let src = &g.0;
    let mut t1 = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for x in 0..3 {
            let w = a[x][i];
            if w == 0.0 {
                continue;
            }
            for y in 0..3 {
                for z in 0..3 {
                    t1[i][y][z] += w * src[x][y][z];
                }
            }
        }
    }
    let mut t2 = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for y in 0..3 {
                let w = b[y][j];
                if w == 0.0 {
                    continue;
                }
                for z in 0..3 {
                    t2[i][j][z] += w * t1[i][y][z];
                }
            }
        }
    }
    let mut out = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for z in 0..3 {
                    s += c[z][k] * t2[i][j][z];
                }
                out[i][j][k] = s;
            }
        }
    }
    GTensor(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Stop at the lowest-index restart whose value reaches this, if set.
    pub target: Option<f64>,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            restarts: 32,
            max_iters: 2000,
            tol: 1e-8,
            seed: 0,
            target: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeResult {
    pub triple: RotationTriple,
    pub rotated: GTensor,
    pub value: f64,
    pub initial_value: f64,
    /// Restart that produced the result; `None` when no restart beat the identity.
    pub restart: Option<usize>,
}

/// Per-mode factors of the higher-order SVD, as proper rotations.
///
/// Columns are eigenvectors of the mode Gram matrices in decreasing order.
/// A rank-one tensor `x u (x) v (x) w` is mapped to a single entry exactly.
pub fn hosvd_rotations(g: &GTensor) -> RotationTriple {
    let mode = |k: usize| -> Rot3 {
        let mut gram = [0.0; 9];
        for ((a, b, c), x) in g.iter() {
            let idx = [a, b, c];
            for ((a2, b2, c2), y) in g.iter() {
                let idx2 = [a2, b2, c2];
                let same_rest = (0..3).filter(|&m| m != k).all(|m| idx[m] == idx2[m]);
                if same_rest {
                    gram[idx[k] * 3 + idx2[k]] += x * y;
                }
            }
        }
        let (_, vecs) = symmetric_eigen(3, &gram);
        let mut m: Mat3 = [[0.0; 3]; 3];
        for (col, v) in vecs.iter().rev().enumerate() {
            let v: Vec3 = [v[0], v[1], v[2]];
            real::set_column(&mut m, col, &v);
        }
        if real::det3(&m) < 0.0 {
            for row in m.iter_mut() {
                row[2] = -row[2];
            }
        }
        Rot3::from_matrix_unchecked(m)
    };
    RotationTriple {
        o_a: mode(0),
        o_b: mode(1),
        o_c: mode(2),
    }
}

struct Candidate {
    triple: RotationTriple,
    value: f64,
}

fn run_restart(g: &GTensor, cfg: &MinimizeConfig, index: usize) -> Candidate {
    let start = match index {
        0 => hosvd_rotations(g),
        1 => RotationTriple::IDENTITY,
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, index as u64));
            RotationTriple {
                o_a: Rot3::random(&mut rng),
                o_b: Rot3::random(&mut rng),
                o_c: Rot3::random(&mut rng),
            }
        }
    };
    let start_value = sep_form(&rotate_g(g, &start));
    let objective = |x: &[f64; 9]| sep_form(&rotate_g(g, &RotationTriple::from_angles(x)));
    let (x, fx) = nelder_mead(objective, start.angles(), cfg.max_iters, cfg.tol);
    if fx < start_value {
        Candidate {
            triple: RotationTriple::from_angles(&x),
            value: fx,
        }
    } else {
        Candidate {
            triple: start,
            value: start_value,
        }
    }
}

/// Minimizes `sep_form(rotate_g(g, q))` over rotation triples `q`.
///
/// Restart 0 starts from the HOSVD factors, restart 1 from the identity and
/// the rest from seeded random rotations; each is a Nelder-Mead search over
/// the nine Euler angles. Restarts run in parallel and are reduced by
/// (value, index), so the result does not depend on the thread count.
pub fn minimize_sep_form(g: &GTensor, cfg: &MinimizeConfig) -> MinimizeResult {
    let initial_value = sep_form(g);
    let mut best: Option<(usize, Candidate)> = None;
    let mut block_start = 0;
    while block_start < cfg.restarts {
        let block_end = (block_start + RESTART_BLOCK).min(cfg.restarts);
        let results: Vec<(usize, Candidate)> = (block_start..block_end)
            .into_par_iter()
            .map(|i| (i, run_restart(g, cfg, i)))
            .collect();
        if let Some(target) = cfg.target {
            if let Some(hit) = results.into_iter().find(|(_, c)| c.value <= target) {
                best = Some(hit);
                break;
            }
        } else {
            for (i, c) in results {
                if best.as_ref().is_none_or(|(_, b)| c.value < b.value) {
                    best = Some((i, c));
                }
            }
        }
        block_start = block_end;
    }

    let (restart, triple) = match best {
        Some((i, c)) if c.value < initial_value => (Some(i), c.triple),
        _ => (None, RotationTriple::IDENTITY),
    };
    let rotated = rotate_g(g, &triple);
    MinimizeResult {
        triple,
        rotated,
        value: sep_form(&rotated),
        initial_value,
        restart,
    }
}

/// Nelder-Mead with restarts from the incumbent while it keeps improving.
fn nelder_mead<const N: usize>(
    f: impl Fn(&[f64; N]) -> f64,
    x0: [f64; N],
    max_iters: usize,
    tol: f64,
) -> ([f64; N], f64) {
    let mut best_x = x0;
    let mut best_f = f(&x0);
    let mut iters = 0;
    while iters < max_iters {
        let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
        simplex.push((best_x, best_f));
        for i in 0..N {
            let mut x = best_x;
            x[i] += INITIAL_STEP;
            simplex.push((x, f(&x)));
        }
        let before = best_f;
        while iters < max_iters {
            iters += 1;
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (lo, hi) = (simplex[0].1, simplex[N].1);
            if hi - lo <= tol * (1.0 + lo.abs()) {
                break;
            }
            let mut centroid = [0.0; N];
            for (x, _) in &simplex[..N] {
                for k in 0..N {
                    centroid[k] += x[k] / N as f64;
                }
            }
            let worst = simplex[N].0;
            let along = |t: f64| -> [f64; N] { std::array::from_fn(|k| centroid[k] + t * (worst[k] - centroid[k])) };
            let xr = along(-1.0);
            let fr = f(&xr);
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = f(&xe);
                simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[N - 1].1 {
                simplex[N] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[N].1 {
                    let xc = along(-0.5);
                    (xc, f(&xc))
                } else {
                    let xc = along(0.5);
                    (xc, f(&xc))
                };
                if fc < simplex[N].1.min(fr) {
                    simplex[N] = (xc, fc);
                } else {
                    let x_best = simplex[0].0;
                    for item in simplex.iter_mut().skip(1) {
                        let x: [f64; N] = std::array::from_fn(|k| x_best[k] + 0.5 * (item.0[k] - x_best[k]));
                        *item = (x, f(&x));
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best_f {
            best_x = simplex[0].0;
            best_f = simplex[0].1;
        }
        if before - best_f <= tol * (1.0 + best_f.abs()) {
            break;
        }
    }
    (best_x, best_f)
}

/// Explicit ensemble for `sum |G| <= 1`.
///
/// Every nonzero `G_abc` contributes four terms of weight `|G_abc|/4`, with
/// Bloch vectors `(p e_a, q e_b, r sign(G) e_c)` for sign patterns
/// `(p, q, r)` in `(+,-,-), (+,+,+), (-,-,+), (-,+,-)`. Their lower-order
/// Pauli terms cancel. The identity term takes the remaining weight.
pub fn decompose3(g: &GTensor) -> Result<SeparableDecomposition> {
    let form = sep_form(g);
    if form > 1.0 + FORM_TOL {
        return Err(Error::NotCertifiedSeparable { form });
    }
    const PATTERNS: [[f64; 3]; 4] = [[1.0, -1.0, -1.0], [1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, -1.0]];
    let mut raw: Vec<(f64, Vec<Vec3>)> = Vec::new();
    for ((a, b, c), x) in g.iter() {
        if x == 0.0 {
            continue;
        }
        for p in PATTERNS {
            let mut va = [0.0; 3];
            let mut vb = [0.0; 3];
            let mut vc = [0.0; 3];
            va[a] = p[0];
            vb[b] = p[1];
            vc[c] = p[2] * x.signum();
            raw.push((x.abs() / 4.0, vec![va, vb, vc]));
        }
    }
    raw.push((1.0 - form, vec![[0.0; 3]; 3]));
    Ok(SeparableDecomposition::from_bloch_terms(3, raw))
}

/// Certificate for `g` built in the frame where `rotate_g(g, q)` is decomposed.
pub fn decompose3_rotated(g: &GTensor, q: &RotationTriple) -> Result<SeparableDecomposition> {
    if *q == RotationTriple::IDENTITY {
        return decompose3(g);
    }
    let cert = decompose3(&rotate_g(g, q))?;
    let ops: Vec<_> = q.rotations().iter().map(Rot3::to_unitary).collect();
    Ok(cert
        .map_local(&ops)
        .with_note("built after local rotations and rotated back to the input frame"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification3 {
    pub verdict: Verdict,
    pub form_before: f64,
    /// Present when the minimizer ran.
    pub minimization: Option<MinimizeResult>,
    pub pt_reports: Vec<PtReport>,
    pub certificate: Option<SeparableDecomposition>,
}

impl Classification3 {
    pub fn min_pt_eigenvalue(&self) -> f64 {
        self.pt_reports.iter().map(|r| r.min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    pub fn form_after(&self) -> Option<f64> {
        self.minimization.map(|m| m.value)
    }
}

/// Partial transposes first; if none is negative, minimize the separability form.
///
/// Entangled when some single-qubit cut has a negative transpose, Separable
/// when the (minimized) form reaches 1, Indeterminate otherwise.
pub fn classify3(g: &GTensor, cfg: &MinimizeConfig) -> Result<Classification3> {
    let rho = validate(&g_reconstruct(g), 3).map_err(|e| match e {
        Error::NotPositive { min_eigenvalue } => Error::InvalidState { min_eigenvalue },
        other => other,
    })?;
    let pt_reports = ph_all_cuts(&rho)?;
    let form_before = sep_form(g);
    let entangled = pt_reports.iter().any(PtReport::witnesses_entanglement);
    if entangled {
        if form_before <= 1.0 + FORM_TOL {
            return Err(Error::InconsistentCriteria(format!(
                "negative partial transpose but sum|G| = {form_before}"
            )));
        }
        return Ok(Classification3 {
            verdict: Verdict::Entangled,
            form_before,
            minimization: None,
            pt_reports,
            certificate: None,
        });
    }
    let cfg = MinimizeConfig {
        target: cfg.target.or(Some(1.0)),
        ..*cfg
    };
    let min = minimize_sep_form(g, &cfg);
    let (verdict, certificate) = if min.value <= 1.0 + FORM_TOL {
        (Verdict::Separable, Some(decompose3_rotated(g, &min.triple)?))
    } else {
        (Verdict::Indeterminate, None)
    };
    Ok(Classification3 {
        verdict,
        form_before,
        minimization: Some(min),
        pt_reports,
        certificate,
    })
}
