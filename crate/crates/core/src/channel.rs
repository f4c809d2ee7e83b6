//! Concrete certificates: Kraus channel pairs, their application to density
//! matrices, verification of unitary-form certificates, block extraction of
//! Kraus operators from a certificate, and the no-ancilla frame-rigidity
//! check.
//!
//! A certificate is a triple `(U, V, {R_i})` with `U ∈ M_mp`, `V ∈ M_nq`
//! unitary, `tr R_iR_i† = 1`, and `U(E₁₁ ⊗ X_i)V = R_i ⊗ Y_i` for every
//! pair. The equivalent vectorized form multiplies the state vectors by
//! `U ⊗ Vᵗ`.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, C64, CMatrix, CVector, Tolerance};
use crate::states::TransformProblem;

/// Local Kraus families `{F_i} ⊂ M_m`, `{G_j} ⊂ M_n`, each summing to the
/// identity in `Σ K†K`.
#[derive(Debug, Clone)]
pub struct KrausChannelPair {
    f_ops: Vec<CMatrix>,
    g_ops: Vec<CMatrix>,
}

impl KrausChannelPair {
    pub fn new(f_ops: Vec<CMatrix>, g_ops: Vec<CMatrix>, tol: &Tolerance) -> Result<Self> {
        for (label, ops) in [("F", &f_ops), ("G", &g_ops)] {
            if ops.is_empty() {
                return Err(Error::ChannelInvalid(format!("empty {label} family")));
            }
            let dim = ops[0].nrows();
            if ops.iter().any(|k| k.shape() != (dim, dim)) {
                return Err(Error::ChannelInvalid(format!(
                    "{label} operators must share one square shape"
                )));
            }
            let mut sum = CMatrix::zeros(dim, dim);
            for k in ops {
                sum += k.adjoint() * k;
            }
            let residual = (&sum - linalg::identity(dim)).norm();
            if residual > 10.0 * tol.abs_eps {
                return Err(Error::ChannelInvalid(format!(
                    "Σ {label}†{label} deviates from identity by {residual:.3e}"
                )));
            }
        }
        Ok(Self { f_ops, g_ops })
    }

    pub fn f_ops(&self) -> &[CMatrix] {
        &self.f_ops
    }

    pub fn g_ops(&self) -> &[CMatrix] {
        &self.g_ops
    }

    pub fn dim_a(&self) -> usize {
        self.f_ops[0].nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.g_ops[0].nrows()
    }
}

/// Apply the tensor channel `ρ ↦ Σ_{ij} (F_i⊗G_j) ρ (F_i⊗G_j)†`.
pub fn apply_channel(ch: &KrausChannelPair, rho: &CMatrix) -> Result<CMatrix> {
    let dim = ch.dim_a() * ch.dim_b();
    if rho.shape() != (dim, dim) {
        return Err(Error::Dimension(format!(
            "density matrix must be {dim}x{dim}, got {:?}",
            rho.shape()
        )));
    }
    let mut out = CMatrix::zeros(dim, dim);
    for f in &ch.f_ops {
        for g in &ch.g_ops {
            let kraus = linalg::kron(f, g);
            out += &kraus * rho * kraus.adjoint();
        }
    }
    Ok(out)
}

/// `Re ⟨y| ρ |y⟩`, the overlap of a (near-)pure ρ with the target ray.
pub fn fidelity(y: &CVector, rho: &CMatrix) -> f64 {
    let applied = rho * y;
    y.dotc(&applied).re
}

/// A `(U, V, {R_i})` certificate at ancilla dimensions `(p, q)`.
#[derive(Debug, Clone)]
pub struct UnitaryCertificate {
    pub p: usize,
    pub q: usize,
    pub u: CMatrix,
    pub v: CMatrix,
    pub r_list: Vec<CMatrix>,
}

fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect())
            })
            .collect(),
    )
}

fn matrix_from_json(value: &Value, what: &str) -> Result<CMatrix> {
    let rows = value
        .as_array()
        .ok_or_else(|| Error::Parse(format!("{what}: expected an array of rows")))?;
    if rows.is_empty() {
        return Err(Error::Parse(format!("{what}: empty matrix")));
    }
    let mut data: Vec<Vec<C64>> = Vec::with_capacity(rows.len());
    for row in rows {
        let cells =
            row.as_array().ok_or_else(|| Error::Parse(format!("{what}: expected rows")))?;
        let mut out = Vec::with_capacity(cells.len());
        for cell in cells {
            let pair = cell
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Parse(format!("{what}: entries are [re, im]")))?;
            let re = pair[0].as_f64().ok_or_else(|| Error::Parse(format!("{what}: bad re")))?;
            let im = pair[1].as_f64().ok_or_else(|| Error::Parse(format!("{what}: bad im")))?;
            out.push(c(re, im));
        }
        data.push(out);
    }
    let cols = data[0].len();
    if data.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!("{what}: ragged rows")));
    }
    Ok(CMatrix::from_fn(data.len(), cols, |i, j| data[i][j]))
}

impl UnitaryCertificate {
    /// Certificate file format:
    /// `{ "p": int, "q": int, "U": [[[re,im],..],..], "V": ..., "R": [...] }`.
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "q": self.q,
            "U": matrix_to_json(&self.u),
            "V": matrix_to_json(&self.v),
            "R": self.r_list.iter().map(matrix_to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("certificate: expected an object".into()))?;
        for key in obj.keys() {
            if !["p", "q", "U", "V", "R"].contains(&key.as_str()) {
                return Err(Error::Parse(format!("certificate: unknown key {key:?}")));
            }
        }
        let p = obj
            .get("p")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("certificate: missing p".into()))? as usize;
        let q = obj
            .get("q")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("certificate: missing q".into()))? as usize;
        let u = matrix_from_json(
            obj.get("U").ok_or_else(|| Error::Parse("certificate: missing U".into()))?,
            "U",
        )?;
        let v = matrix_from_json(
            obj.get("V").ok_or_else(|| Error::Parse("certificate: missing V".into()))?,
            "V",
        )?;
        let r_json = obj
            .get("R")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("certificate: missing R".into()))?;
        let r_list = r_json
            .iter()
            .enumerate()
            .map(|(i, rj)| matrix_from_json(rj, &format!("R[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { p, q, u, v, r_list })
    }
}

/// Per-pair residuals of both certificate formulations.
#[derive(Debug, Clone, Serialize)]
pub struct PairCheck {
    /// `‖U(E₁₁⊗X_i)V − R_i⊗Y_i‖_F`
    pub residual_matrix: f64,
    /// `‖(U⊗Vᵗ)·x̃_i − ỹ_i‖`
    pub residual_vector: f64,
    /// `|tr R_iR_i† − 1|`
    pub r_trace_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub unitarity_u: f64,
    pub unitarity_v: f64,
    pub pairs: Vec<PairCheck>,
    pub pass: bool,
}

/// Check a certificate against a problem in both the matrix form (c) and
/// the vectorized form (b), plus unitarity and the trace normalization.
pub fn verify_certificate(
    cert: &UnitaryCertificate,
    problem: &TransformProblem,
    tol: &Tolerance,
) -> Result<CertificateReport> {
    let (m, n) = (problem.dim_a(), problem.dim_b());
    let (p, q) = (cert.p, cert.q);
    if p == 0 || q == 0 {
        return Err(Error::Dimension("ancilla dimensions must be positive".into()));
    }
    if cert.u.shape() != (m * p, m * p) || cert.v.shape() != (n * q, n * q) {
        return Err(Error::Dimension(format!(
            "certificate shapes U{:?}, V{:?} do not match (mp, nq) = ({}, {})",
            cert.u.shape(),
            cert.v.shape(),
            m * p,
            n * q
        )));
    }
    if cert.r_list.len() != problem.k() {
        return Err(Error::Dimension(format!(
            "certificate has {} R matrices for {} pairs",
            cert.r_list.len(),
            problem.k()
        )));
    }
    if cert.r_list.iter().any(|r| r.shape() != (p, q)) {
        return Err(Error::Dimension("every R_i must be p×q".into()));
    }

    let thresh = 10.0 * tol.abs_eps;
    let unitarity_u = linalg::unitarity_residual(&cert.u);
    let unitarity_v = linalg::unitarity_residual(&cert.v);
    let e11 = linalg::e11(p, q);
    let u_kron_vt = linalg::kron(&cert.u, &cert.v.transpose());

    let mut pairs = Vec::with_capacity(problem.k());
    let mut all_pass = unitarity_u <= thresh && unitarity_v <= thresh;
    for (pair, r) in problem.pairs().iter().zip(&cert.r_list) {
        let x = pair.x.matrix_form();
        let y = pair.y.matrix_form();
        let lifted_x = linalg::kron(&e11, &x);
        let lifted_y = linalg::kron(r, &y);
        let residual_matrix = (&cert.u * &lifted_x * &cert.v - &lifted_y).norm();
        let x_tilde = linalg::matrix_to_vec(&lifted_x);
        let y_tilde = linalg::matrix_to_vec(&lifted_y);
        let residual_vector = (&u_kron_vt * x_tilde - y_tilde).norm();
        let r_trace_error = ((r.adjoint() * r).trace().re - 1.0).abs();
        let pass = residual_matrix <= thresh
            && residual_vector <= thresh
            && r_trace_error <= 10.0 * tol.rel_eps;
        all_pass &= pass;
        pairs.push(PairCheck { residual_matrix, residual_vector, r_trace_error, pass });
    }
    Ok(CertificateReport { unitarity_u, unitarity_v, pairs, pass: all_pass })
}

/// Extract the Kraus families from a certificate: `F_i` is the `(i,1)` m×m
/// block of `U` and `G_j` the transpose of the `(1,j)` n×n block of `V`, as
/// in the block identity behind the certificate form. Unitarity of `U`, `V`
/// makes both families trace-preserving.
pub fn kraus_from_unitary(cert: &UnitaryCertificate, tol: &Tolerance) -> Result<KrausChannelPair> {
    let mp = cert.u.nrows();
    let nq = cert.v.nrows();
    if mp % cert.p != 0 || nq % cert.q != 0 {
        return Err(Error::Dimension("certificate dimensions not divisible by (p, q)".into()));
    }
    let m = mp / cert.p;
    let n = nq / cert.q;
    let f_ops: Vec<CMatrix> = (0..cert.p)
        .map(|i| CMatrix::from_fn(m, m, |r, cdx| cert.u[(i * m + r, cdx)]))
        .collect();
    let g_ops: Vec<CMatrix> = (0..cert.q)
        .map(|j| CMatrix::from_fn(n, n, |r, cdx| cert.v[(cdx, j * n + r)]))
        .collect();
    KrausChannelPair::new(f_ops, g_ops, tol)
}

/// Witness for a no-ancilla impossibility: with the frames pinned by
/// `pinning_pair`, the named consistency check fails on `failing_pair`.
#[derive(Debug, Clone, Serialize)]
pub struct FrameRigidityWitness {
    pub pinning_pair: usize,
    pub failing_pair: usize,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub enum FrameRigidityOutcome {
    /// No choice of phases and kernel rotations reproduces every pair.
    Impossible(FrameRigidityWitness),
    /// A concrete p=q=1 certificate was constructed and verified.
    Feasible(Box<UnitaryCertificate>),
    Inconclusive(String),
}

/// Union-find with phase potentials: each constraint fixes `φ_u − φ_v`.
struct PhaseGraph {
    parent: Vec<usize>,
    /// offset[i] = φ_i − φ_parent(i)
    offset: Vec<f64>,
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * std::f64::consts::PI);
    if x > std::f64::consts::PI {
        x -= 2.0 * std::f64::consts::PI;
    }
    if x < -std::f64::consts::PI {
        x += 2.0 * std::f64::consts::PI;
    }
    x
}

impl PhaseGraph {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), offset: vec![0.0; n] }
    }

    fn find(&mut self, i: usize) -> (usize, f64) {
        if self.parent[i] == i {
            return (i, 0.0);
        }
        let (root, parent_off) = self.find(self.parent[i]);
        self.offset[i] += parent_off;
        self.parent[i] = root;
        (root, self.offset[i])
    }

    /// Impose φ_u − φ_v = delta; false on an inconsistent cycle.
    fn constrain(&mut self, u: usize, v: usize, delta: f64, tol_angle: f64) -> bool {
        let (ru, ou) = self.find(u);
        let (rv, ov) = self.find(v);
        if ru == rv {
            return wrap_angle(ou - ov - delta).abs() <= tol_angle;
        }
        // φ_u = ou + φ_ru, φ_v = ov + φ_rv; want ou + φ_ru − ov − φ_rv = delta
        self.parent[ru] = rv;
        self.offset[ru] = delta + ov - ou;
        true
    }

    fn phase_of(&mut self, i: usize) -> f64 {
        let (_, off) = self.find(i);
        off
    }
}

/// No-ancilla rigidity: a pair whose input and output share distinct
/// singular values pins the singular-vector frames of any `U X_i V = Y_i`
/// solution up to per-value phases and kernel rotations; the remaining pairs
/// then reduce to a phase-alignment feasibility.
///
/// Fails with `Precondition` when no pinning pair exists. `Impossible` is
/// sound for p = q = 1; it says nothing about larger ancillas.
pub fn frame_rigidity_check(
    problem: &TransformProblem,
    tol: &Tolerance,
) -> Result<FrameRigidityOutcome> {
    let (m, n) = (problem.dim_a(), problem.dim_b());

    // 1. pinning pair: distinct nonzero singular values, equal to the output's
    let mut pinned = None;
    for (i, pair) in problem.pairs().iter().enumerate() {
        let fx = linalg::svd(&pair.x.matrix_form())?;
        let fy = linalg::svd(&pair.y.matrix_form())?;
        let rank_x = linalg::numerical_rank(&fx.s, tol);
        let rank_y = linalg::numerical_rank(&fy.s, tol);
        if rank_x == 0 || rank_x != rank_y {
            continue;
        }
        let distinct = fx.s[..rank_x].windows(2).all(|w| !tol.reals_match(w[0], w[1]));
        let matching =
            fx.s[..rank_x].iter().zip(&fy.s[..rank_y]).all(|(a, b)| tol.reals_match(*a, *b));
        if distinct && matching {
            pinned = Some((i, fx, fy, rank_x));
            break;
        }
    }
    let Some((pin_idx, fx0, fy0, rho)) = pinned else {
        return Err(Error::Precondition(
            "no pair with distinct, spectrum-matching singular values to pin the frames".into(),
        ));
    };

    let a_frame = &fx0.u;
    let b_frame = &fx0.v;
    let c_frame = &fy0.u;
    let d_frame = &fy0.v;

    // transformed pairs: S = A†·X·B, T = C†·Y·D; the question is
    // P·S·Q = T with P = diag(θ) ⊕ P_f, Q = diag(θ̄) ⊕ Q_f.
    let transformed: Vec<(usize, CMatrix, CMatrix)> = problem
        .pairs()
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let s = a_frame.adjoint() * pair.x.matrix_form() * b_frame;
            let t = c_frame.adjoint() * pair.y.matrix_form() * d_frame;
            (i, s, t)
        })
        .collect();

    let edge_thresh = (10.0 * tol.abs_eps).sqrt();
    let angle_tol = (10.0 * tol.abs_eps / edge_thresh).max(1e-7);
    let mut phases = PhaseGraph::new(rho);

    let block = |mat: &CMatrix, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| {
        CMatrix::from_fn(rows.len(), cols.len(), |r, cdx| mat[(rows.start + r, cols.start + cdx)])
    };

    for (i, s, t) in &transformed {
        let s11 = block(s, 0..rho, 0..rho);
        let t11 = block(t, 0..rho, 0..rho);
        let s12 = block(s, 0..rho, rho..n);
        let t12 = block(t, 0..rho, rho..n);
        let s21 = block(s, rho..m, 0..rho);
        let t21 = block(t, rho..m, 0..rho);
        let s22 = block(s, rho..m, rho..n);
        let t22 = block(t, rho..m, rho..n);

        // (a) pinned-block magnitudes, with phase constraints on robust entries
        let mut scan = |sm: &CMatrix, tm: &CMatrix, label: &str| -> Option<FrameRigidityWitness> {
            for u in 0..rho {
                for v in 0..rho {
                    let (sv, tv) = (sm[(u, v)], tm[(u, v)]);
                    if !tol.reals_match(sv.norm(), tv.norm()) {
                        return Some(FrameRigidityWitness {
                            pinning_pair: pin_idx,
                            failing_pair: *i,
                            check: format!("{label} magnitude"),
                            detail: format!(
                                "entry ({u},{v}): |source| = {:.6e}, |target| = {:.6e}",
                                sv.norm(),
                                tv.norm()
                            ),
                        });
                    }
                    if sv.norm() > edge_thresh && tv.norm() > edge_thresh {
                        let delta = wrap_angle(tv.arg() - sv.arg());
                        if !phases.constrain(u, v, delta, angle_tol) {
                            return Some(FrameRigidityWitness {
                                pinning_pair: pin_idx,
                                failing_pair: *i,
                                check: format!("{label} phase cycle"),
                                detail: format!("entry ({u},{v}) closes an inconsistent cycle"),
                            });
                        }
                    }
                }
            }
            None
        };
        if let Some(w) = scan(&s11, &t11, "pinned block") {
            return Ok(FrameRigidityOutcome::Impossible(w));
        }
        // (b) row Gram of the right kernel block and column Gram of the left
        // kernel block carry the same phase structure
        let rg_s = &s12 * s12.adjoint();
        let rg_t = &t12 * t12.adjoint();
        if let Some(w) = scan(&rg_s, &rg_t, "row-Gram") {
            return Ok(FrameRigidityOutcome::Impossible(w));
        }
        let cg_s = s21.adjoint() * &s21;
        let cg_t = t21.adjoint() * &t21;
        if let Some(w) = scan(&cg_s, &cg_t, "column-Gram") {
            return Ok(FrameRigidityOutcome::Impossible(w));
        }
        // (c) kernel-kernel block must be unitarily equivalent
        if m > rho && n > rho {
            let ssv = linalg::svd(&s22)?;
            let tsv = linalg::svd(&t22)?;
            if ssv.s.iter().zip(&tsv.s).any(|(a, b)| !tol.reals_match(*a, *b)) {
                return Ok(FrameRigidityOutcome::Impossible(FrameRigidityWitness {
                    pinning_pair: pin_idx,
                    failing_pair: *i,
                    check: "kernel-block singular values".into(),
                    detail: format!("{:?} vs {:?}", ssv.s, tsv.s),
                }));
            }
        }
        // (d) spectra of the row/column Grams joined with the kernel block
        if m > rho {
            let left_s = &s21 * s21.adjoint() + &s22 * s22.adjoint();
            let left_t = &t21 * t21.adjoint() + &t22 * t22.adjoint();
            let (es, _) = linalg::eigh(&left_s)?;
            let (et, _) = linalg::eigh(&left_t)?;
            if es.iter().zip(&et).any(|(a, b)| !tol.reals_match(*a, *b)) {
                return Ok(FrameRigidityOutcome::Impossible(FrameRigidityWitness {
                    pinning_pair: pin_idx,
                    failing_pair: *i,
                    check: "kernel-row Gram spectrum".into(),
                    detail: format!("{es:?} vs {et:?}"),
                }));
            }
        }
        if n > rho {
            let right_s = s12.adjoint() * &s12 + s22.adjoint() * &s22;
            let right_t = t12.adjoint() * &t12 + t22.adjoint() * &t22;
            let (es, _) = linalg::eigh(&right_s)?;
            let (et, _) = linalg::eigh(&right_t)?;
            if es.iter().zip(&et).any(|(a, b)| !tol.reals_match(*a, *b)) {
                return Ok(FrameRigidityOutcome::Impossible(FrameRigidityWitness {
                    pinning_pair: pin_idx,
                    failing_pair: *i,
                    check: "kernel-column Gram spectrum".into(),
                    detail: format!("{es:?} vs {et:?}"),
                }));
            }
        }
    }

    // Constructive attempt: solve the kernel rotations by alternating
    // Procrustes and verify the assembled p=q=1 certificate.
    let theta: Vec<C64> =
        (0..rho).map(|u| C64::from_polar(1.0, phases.phase_of(u))).collect();
    let mut p_free = linalg::identity(m - rho);
    let mut q_free = linalg::identity(n - rho);
    for _ in 0..60 {
        if m > rho {
            // stack [S21·diag(θ̄) | S22·Q_f] → [T21 | T22] over all pairs
            let mut cols_m: Vec<CMatrix> = Vec::new();
            let mut cols_n: Vec<CMatrix> = Vec::new();
            for (_, s, t) in &transformed {
                let s21 = block(s, rho..m, 0..rho);
                let s22 = block(s, rho..m, rho..n);
                let mut s21p = s21.clone();
                for v in 0..rho {
                    for r in 0..(m - rho) {
                        s21p[(r, v)] *= theta[v].conj();
                    }
                }
                cols_m.push(s21p);
                cols_m.push(&s22 * &q_free);
                cols_n.push(block(t, rho..m, 0..rho));
                cols_n.push(block(t, rho..m, rho..n));
            }
            let stack = |mats: &[CMatrix]| -> CMatrix {
                let total: usize = mats.iter().map(|x| x.ncols()).sum();
                let mut out = CMatrix::zeros(m - rho, total);
                let mut at = 0;
                for mat in mats {
                    for cdx in 0..mat.ncols() {
                        for r in 0..(m - rho) {
                            out[(r, at + cdx)] = mat[(r, cdx)];
                        }
                    }
                    at += mat.ncols();
                }
                out
            };
            let big_m = stack(&cols_m);
            let big_n = stack(&cols_n);
            // min ‖P·M − N‖ over unitary P
            p_free = linalg::unitary_tracemax(&(&big_n * big_m.adjoint()))?.adjoint();
        }
        if n > rho {
            // stack [diag(θ)·S12 ; P_f·S22]·Q_f → [T12 ; T22] over all pairs
            let mut rows_m: Vec<CMatrix> = Vec::new();
            let mut rows_n: Vec<CMatrix> = Vec::new();
            for (_, s, t) in &transformed {
                let s12 = block(s, 0..rho, rho..n);
                let s22 = block(s, rho..m, rho..n);
                let mut s12p = s12.clone();
                for u in 0..rho {
                    for cdx in 0..(n - rho) {
                        s12p[(u, cdx)] *= theta[u];
                    }
                }
                rows_m.push(s12p);
                rows_m.push(&p_free * &s22);
                rows_n.push(block(t, 0..rho, rho..n));
                rows_n.push(block(t, rho..m, rho..n));
            }
            let stack = |mats: &[CMatrix]| -> CMatrix {
                let total: usize = mats.iter().map(|x| x.nrows()).sum();
                let mut out = CMatrix::zeros(total, n - rho);
                let mut at = 0;
                for mat in mats {
                    for r in 0..mat.nrows() {
                        for cdx in 0..(n - rho) {
                            out[(at + r, cdx)] = mat[(r, cdx)];
                        }
                    }
                    at += mat.nrows();
                }
                out
            };
            let big_m = stack(&rows_m);
            let big_n = stack(&rows_n);
            // min ‖M·Q − N‖ over unitary Q
            q_free = linalg::unitary_tracemax(&(big_m.adjoint() * big_n))?.adjoint();
        }
        if m == rho && n == rho {
            break;
        }
    }

    let mut p_mat = CMatrix::zeros(m, m);
    for u in 0..rho {
        p_mat[(u, u)] = theta[u];
    }
    for r in 0..(m - rho) {
        for cdx in 0..(m - rho) {
            p_mat[(rho + r, rho + cdx)] = p_free[(r, cdx)];
        }
    }
    let mut q_mat = CMatrix::zeros(n, n);
    for v in 0..rho {
        q_mat[(v, v)] = theta[v].conj();
    }
    for r in 0..(n - rho) {
        for cdx in 0..(n - rho) {
            q_mat[(rho + r, rho + cdx)] = q_free[(r, cdx)];
        }
    }
    let u_cand = c_frame * &p_mat * a_frame.adjoint();
    let v_cand = b_frame * &q_mat * d_frame.adjoint();

    let r_list: Vec<CMatrix> = problem
        .pairs()
        .iter()
        .map(|pair| {
            let z = &u_cand * pair.x.matrix_form() * &v_cand;
            let y = pair.y.matrix_form();
            let overlap = (y.adjoint() * z).trace();
            let r = if overlap.norm() > 0.0 { overlap / cr(overlap.norm()) } else { cr(1.0) };
            CMatrix::from_row_slice(1, 1, &[r])
        })
        .collect();
    let cert = UnitaryCertificate { p: 1, q: 1, u: u_cand, v: v_cand, r_list };
    let report = verify_certificate(&cert, problem, tol)?;
    if report.pass {
        Ok(FrameRigidityOutcome::Feasible(Box::new(cert)))
    } else {
        Ok(FrameRigidityOutcome::Inconclusive(
            "phase and spectrum constraints are satisfiable, but no explicit no-ancilla \
             certificate was found"
                .into(),
        ))
    }
}
