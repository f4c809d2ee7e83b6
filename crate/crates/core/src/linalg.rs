//! Dense complex linear algebra shared by every module: the vec↔matrix state
//! correspondence, SVD with full unitary frames, Hermitian and general
//! eigendecompositions, Kronecker and Schur products, and tolerance-aware
//! comparisons.
//!
//! All routines are pure functions on immutable values. The decomposition
//! backend is nalgebra; the contract here is only the residual bounds checked
//! by the tests, not any particular algorithm.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Shorthand for a complex scalar.
#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Shorthand for a real scalar as a complex number.
#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Numerical comparison thresholds used throughout the pipeline.
///
/// `abs_eps`/`rel_eps` govern scalar and residual comparisons, `psd_eps` is
/// the slack allowed below zero for eigenvalues of matrices that must be
/// positive semidefinite.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs_eps: f64,
    pub rel_eps: f64,
    pub psd_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs_eps: 1e-9, rel_eps: 1e-9, psd_eps: 1e-7 }
    }
}

impl Tolerance {
    pub fn new(abs_eps: f64, rel_eps: f64, psd_eps: f64) -> Result<Self> {
        if abs_eps < 0.0 || rel_eps < 0.0 || psd_eps < 0.0 {
            return Err(Error::Precondition("tolerances must be non-negative".into()));
        }
        Ok(Self { abs_eps, rel_eps, psd_eps })
    }

    /// Multiset-membership rule: `a` matches `b` iff
    /// `|a − b| ≤ rel_eps·max(|a|,|b|) + abs_eps`.
    pub fn reals_match(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.rel_eps * a.abs().max(b.abs()) + self.abs_eps
    }

    /// Same rule for complex scalars, on the modulus of the difference.
    pub fn values_match(&self, a: C64, b: C64) -> bool {
        (a - b).norm() <= self.rel_eps * a.norm().max(b.norm()) + self.abs_eps
    }
}

/// Reshape a length `m·n` amplitude vector into its `m×n` matrix form, with
/// the `(i,j)` entry taken from position `i·n + j` (row-major).
pub fn vec_to_matrix(x: &[C64], m: usize, n: usize) -> Result<CMatrix> {
    if x.len() != m * n {
        return Err(Error::Dimension(format!(
            "vector of length {} cannot fill a {}x{} matrix",
            x.len(),
            m,
            n
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::Dimension("matrix dimensions must be positive".into()));
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite entry in state vector".into()));
    }
    Ok(CMatrix::from_row_slice(m, n, x))
}

/// Inverse of [`vec_to_matrix`]: flatten a matrix row by row.
pub fn matrix_to_vec(x: &CMatrix) -> CVector {
    let (m, n) = x.shape();
    CVector::from_fn(m * n, |k, _| x[(k / n, k % n)])
}

/// Singular value decomposition `X = U·diag(s)·V†` with full square frames.
#[derive(Debug, Clone)]
pub struct SvdForm {
    /// `m×m` unitary; columns are left singular vectors.
    pub u: CMatrix,
    /// Singular values, descending, `min(m,n)` of them.
    pub s: Vec<f64>,
    /// `n×n` unitary; columns are right singular vectors.
    pub v: CMatrix,
}

impl SvdForm {
    pub fn reconstruct(&self) -> CMatrix {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let mut sigma = CMatrix::zeros(m, n);
        for (k, &sv) in self.s.iter().enumerate() {
            sigma[(k, k)] = cr(sv);
        }
        &self.u * sigma * self.v.adjoint()
    }

    /// Singular values above the rank cutoff (see [`numerical_rank`]).
    pub fn nonzero(&self, tol: &Tolerance) -> Vec<f64> {
        let r = numerical_rank(&self.s, tol);
        self.s[..r].to_vec()
    }
}

/// SVD with singular values sorted descending and frames completed to full
/// unitaries.
pub fn svd(x: &CMatrix) -> Result<SvdForm> {
    let (m, n) = x.shape();
    let decomp = x.clone().try_svd(true, true, f64::EPSILON, 0).ok_or_else(|| {
        Error::Numerical("SVD failed to converge within the iteration budget".into())
    })?;
    let u_thin = decomp.u.expect("u requested");
    let vt_thin = decomp.v_t.expect("v_t requested");
    let k = decomp.singular_values.len();

    // Sort descending, permuting the frames to match.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| decomp.singular_values[b].total_cmp(&decomp.singular_values[a]));
    let s: Vec<f64> = order.iter().map(|&i| decomp.singular_values[i]).collect();
    let u_sorted = CMatrix::from_fn(m, k, |r, cdx| u_thin[(r, order[cdx])]);
    let v_sorted = CMatrix::from_fn(n, k, |r, cdx| vt_thin[(order[cdx], r)].conj());

    Ok(SvdForm {
        u: complete_orthonormal_columns(&u_sorted)?,
        s,
        v: complete_orthonormal_columns(&v_sorted)?,
    })
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Schur (entrywise) product of two equal-shaped matrices.
pub fn schur_product(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "Schur product needs equal shapes, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.component_mul(b))
}

/// Reduced state on system A: `tr_B |x⟩⟨x| = X·X†` for the matrix form `X`.
pub fn partial_trace_b(x: &[C64], m: usize, n: usize) -> Result<CMatrix> {
    let mat = vec_to_matrix(x, m, n)?;
    Ok(&mat * mat.adjoint())
}

/// Eigendecomposition of a Hermitian matrix. Returns eigenvalues ascending
/// and the matching unitary eigenvector matrix (columns).
pub fn eigh(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if h.nrows() != h.ncols() {
        return Err(Error::Dimension("eigh needs a square matrix".into()));
    }
    let n = h.nrows();
    let se = nalgebra::SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, cdx| se.eigenvectors[(r, order[cdx])]);
    Ok((vals, vecs))
}

/// Eigenvalues of a general (square, possibly non-normal) complex matrix,
/// sorted by magnitude descending then phase ascending.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("eigenvalues need a square matrix".into()));
    }
    if a.nrows() == 0 {
        return Ok(vec![]);
    }
    let ev = a
        .clone()
        .try_schur(f64::EPSILON, 0)
        .and_then(|schur| schur.eigenvalues())
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let mut vals: Vec<C64> = ev.iter().copied().collect();
    sort_complex_canonical(&mut vals);
    Ok(vals)
}

/// Canonical spectrum order: magnitude descending, phase ascending.
pub fn sort_complex_canonical(vals: &mut [C64]) {
    vals.sort_by(|a, b| {
        b.norm().total_cmp(&a.norm()).then_with(|| a.arg().total_cmp(&b.arg()))
    });
}

/// Number of singular values above `abs_eps·s_max`; the rank used by every
/// divisibility and peeling decision.
pub fn numerical_rank(s: &[f64], tol: &Tolerance) -> usize {
    let s_max = s.first().copied().unwrap_or(0.0);
    if s_max <= tol.abs_eps {
        return 0;
    }
    s.iter().take_while(|&&sv| sv > tol.abs_eps * s_max).count()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// The `p×q` matrix with 1 at position (1,1) and 0 elsewhere.
pub fn e11(p: usize, q: usize) -> CMatrix {
    let mut m = CMatrix::zeros(p, q);
    m[(0, 0)] = cr(1.0);
    m
}

/// ‖U·U† − I‖_F, zero for a unitary.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    (u * u.adjoint() - identity(u.nrows())).norm()
}

/// Gram matrix `G[i][j] = ⟨v_i|v_j⟩` of a family of equal-length vectors.
pub fn gram_of_vectors(vs: &[CVector]) -> Result<CMatrix> {
    let k = vs.len();
    if k == 0 {
        return Err(Error::Dimension("Gram matrix of an empty family".into()));
    }
    let dim = vs[0].len();
    if vs.iter().any(|v| v.len() != dim) {
        return Err(Error::Dimension("Gram matrix needs equal-length vectors".into()));
    }
    Ok(CMatrix::from_fn(k, k, |i, j| vs[i].dotc(&vs[j])))
}

/// Extend `k` orthonormal columns of an `m×k` matrix to an `m×m` unitary by
/// Gram–Schmidt over the standard basis in index order.
pub fn complete_orthonormal_columns(cols: &CMatrix) -> Result<CMatrix> {
    let (m, k) = cols.shape();
    if k > m {
        return Err(Error::Dimension("more columns than rows to complete".into()));
    }
    let mut basis: Vec<CVector> = (0..k).map(|j| cols.column(j).into_owned()).collect();
    let mut cursor = 0usize;
    while basis.len() < m {
        if cursor >= m {
            return Err(Error::Numerical(
                "could not complete orthonormal basis; input columns not orthonormal".into(),
            ));
        }
        let mut cand = CVector::zeros(m);
        cand[cursor] = cr(1.0);
        cursor += 1;
        for b in &basis {
            let overlap = b.dotc(&cand);
            cand -= b * overlap;
        }
        let norm = cand.norm();
        if norm > 1e-8 {
            basis.push(cand / cr(norm));
        }
    }
    Ok(CMatrix::from_fn(m, m, |r, j| basis[j][r]))
}

/// Fill the unspecified rows of a partially given square matrix so the result
/// is unitary. `specified[i]` marks rows that must be kept; they are required
/// to be orthonormal already. Unspecified rows are produced by Gram–Schmidt
/// over the standard basis in index order.
pub fn complete_unitary_rows(partial: &CMatrix, specified: &[bool]) -> Result<CMatrix> {
    let n = partial.nrows();
    if partial.ncols() != n || specified.len() != n {
        return Err(Error::Dimension("row completion needs a square matrix".into()));
    }
    let kept: Vec<CVector> = (0..n)
        .filter(|&i| specified[i])
        .map(|i| partial.row(i).transpose().conjugate())
        .collect();
    for (a, va) in kept.iter().enumerate() {
        for (b, vb) in kept.iter().enumerate() {
            let g = va.dotc(vb);
            let want = if a == b { 1.0 } else { 0.0 };
            if (g - cr(want)).norm() > 1e-9 {
                return Err(Error::Precondition(
                    "specified rows are not orthonormal".into(),
                ));
            }
        }
    }
    let mut basis = kept;
    let mut fills: Vec<CVector> = Vec::new();
    let mut cursor = 0usize;
    while basis.len() < n {
        if cursor >= n {
            return Err(Error::Numerical("row completion ran out of basis vectors".into()));
        }
        let mut cand = CVector::zeros(n);
        cand[cursor] = cr(1.0);
        cursor += 1;
        for b in &basis {
            let overlap = b.dotc(&cand);
            cand -= b * overlap;
        }
        let norm = cand.norm();
        if norm > 1e-8 {
            let v = cand / cr(norm);
            basis.push(v.clone());
            fills.push(v);
        }
    }
    let mut out = partial.clone();
    let mut fill_iter = fills.into_iter();
    for i in 0..n {
        if !specified[i] {
            let v = fill_iter.next().expect("one fill per unspecified row");
            for j in 0..n {
                out[(i, j)] = v[j].conj();
            }
        }
    }
    Ok(out)
}

/// The unitary maximizing `Re tr(W·K)`: with `K = PΣQ†`, the optimum is
/// `W = Q·P†` and the maximum is `Σσ`. This solves the orthogonal-Procrustes
/// subproblems in the alternating searches.
pub fn unitary_tracemax(k: &CMatrix) -> Result<CMatrix> {
    let f = svd(k)?;
    Ok(&f.v * f.u.adjoint())
}

/// Haar-distributed random unitary: QR of a complex Gaussian matrix with the
/// R-diagonal phases folded into Q.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / cr(d.norm()) } else { cr(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random unit vector with complex Gaussian entries.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(re, im)
        });
        let norm = v.norm();
        if norm > 1e-6 {
            return v / cr(norm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn vec_to_matrix_basis_vector() {
        let x = vec![cr(1.0), cr(0.0), cr(0.0), cr(0.0)];
        let m = vec_to_matrix(&x, 2, 2).unwrap();
        assert_eq!(m, CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(0.0)]));
    }

    #[test]
    fn vec_to_matrix_rejects_bad_length() {
        let x = vec![cr(1.0); 5];
        assert!(matches!(vec_to_matrix(&x, 2, 2), Err(Error::Dimension(_))));
    }

    #[test]
    fn sec3_state_becomes_diagonal_matrix() {
        let s5 = 5f64.sqrt();
        let mut x = vec![cr(0.0); 16];
        x[0] = cr(1.6 / s5);
        x[5] = cr(1.2 / s5);
        x[10] = cr(0.8 / s5);
        x[15] = cr(0.6 / s5);
        let m = vec_to_matrix(&x, 4, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { [1.6, 1.2, 0.8, 0.6][i] / s5 } else { 0.0 };
                assert!((m[(i, j)] - cr(want)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn matrix_to_vec_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(m, n) in &[(1usize, 1usize), (2, 3), (4, 4), (8, 2)] {
            let x: Vec<C64> = (0..m * n)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let mat = vec_to_matrix(&x, m, n).unwrap();
            let back = matrix_to_vec(&mat);
            for (a, b) in x.iter().zip(back.iter()) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn matrix_to_vec_of_e11() {
        let v = matrix_to_vec(&e11(2, 2));
        assert_eq!(v.as_slice(), &[cr(1.0), cr(0.0), cr(0.0), cr(0.0)]);
    }

    // With the row-major state ordering (x = vec(Xᵗ)), the multiplication
    // identity reads matrix_to_vec(A·X·B) = (A ⊗ Bᵗ)·matrix_to_vec(X).
    #[test]
    fn vec_multiplication_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = haar_unitary(&mut rng, 3);
            let b = haar_unitary(&mut rng, 2);
            let x = CMatrix::from_fn(3, 2, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let lhs = matrix_to_vec(&(&a * &x * &b));
            let rhs = kron(&a, &b.transpose()) * matrix_to_vec(&x);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn svd_of_sec3_diagonal() {
        let s5 = 5f64.sqrt();
        let x = CMatrix::from_diagonal(&CVector::from_vec(vec![
            cr(1.6 / s5),
            cr(1.2 / s5),
            cr(0.8 / s5),
            cr(0.6 / s5),
        ]));
        let f = svd(&x).unwrap();
        let want = [1.6 / s5, 1.2 / s5, 0.8 / s5, 0.6 / s5];
        for (a, b) in f.s.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((f.reconstruct() - &x).norm() < 1e-12);
        assert!(unitarity_residual(&f.u) < 1e-12);
        assert!(unitarity_residual(&f.v) < 1e-12);
    }

    #[test]
    fn svd_of_zero_matrix_has_no_nonzero_values() {
        let x = CMatrix::zeros(3, 2);
        let f = svd(&x).unwrap();
        assert!(f.nonzero(&tol()).is_empty());
    }

    // X₂ = [I₂ I₂] has X₂X₂† = 2·I₂, so both singular values are √2.
    #[test]
    fn svd_of_wide_block_matrix() {
        let mut x = CMatrix::zeros(2, 4);
        x[(0, 0)] = cr(1.0);
        x[(0, 2)] = cr(1.0);
        x[(1, 1)] = cr(1.0);
        x[(1, 3)] = cr(1.0);
        let gram = &x * x.adjoint();
        assert!((gram - identity(2) * cr(2.0)).norm() < 1e-15);
        let f = svd(&x).unwrap();
        assert!((f.s[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!((f.s[1] - 2f64.sqrt()).abs() < 1e-12);
        assert!((f.reconstruct() - &x).norm() < 1e-12);
    }

    #[test]
    fn kron_of_e11_row() {
        let a = e11(1, 2);
        let b = CMatrix::from_row_slice(1, 1, &[cr(1.0)]);
        assert_eq!(kron(&a, &b), CMatrix::from_row_slice(1, 2, &[cr(1.0), cr(0.0)]));
    }

    // eig(A⊗B) = {α·β}, cross-checked against the closed-form 2×2 spectrum.
    #[test]
    fn kron_eigenvalue_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eig2 = |m: &CMatrix| -> Vec<f64> {
            // Hermitian 2×2: λ = (tr ± √(tr² − 4·det)) / 2, both real.
            let tr = (m[(0, 0)] + m[(1, 1)]).re;
            let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
            let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
            vec![(tr + disc) / 2.0, (tr - disc) / 2.0]
        };
        for _ in 0..20 {
            let rh = |rng: &mut ChaCha8Rng| {
                let d0 = rng.random::<f64>() - 0.5;
                let d1 = rng.random::<f64>() - 0.5;
                let off = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                CMatrix::from_row_slice(2, 2, &[cr(d0), off, off.conj(), cr(d1)])
            };
            let a = rh(&mut rng);
            let b = rh(&mut rng);
            let mut want: Vec<f64> = eig2(&a)
                .into_iter()
                .flat_map(|x| eig2(&b).into_iter().map(move |y| x * y))
                .collect();
            want.sort_by(f64::total_cmp);
            let (mut got, _) = eigh(&kron(&a, &b)).unwrap();
            got.sort_by(f64::total_cmp);
            for (x, y) in want.iter().zip(got.iter()) {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn kron_mixed_product_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let rnd = |rng: &mut ChaCha8Rng, m: usize, n: usize| {
                CMatrix::from_fn(m, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            };
            let a = rnd(&mut rng, 2, 3);
            let b = rnd(&mut rng, 3, 2);
            let cm = rnd(&mut rng, 3, 2);
            let d = rnd(&mut rng, 2, 4);
            let lhs = kron(&(&a * &cm), &(&b * &d));
            let rhs = kron(&a, &b) * kron(&cm, &d);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn schur_with_identity_keeps_diagonal() {
        let a = CMatrix::from_row_slice(2, 2, &[cr(1.0), c(2.0, 1.0), c(0.5, -0.5), cr(3.0)]);
        let d = schur_product(&a, &identity(2)).unwrap();
        assert_eq!(d[(0, 0)], cr(1.0));
        assert_eq!(d[(1, 1)], cr(3.0));
        assert_eq!(d[(0, 1)], cr(0.0));
    }

    #[test]
    fn schur_with_zero_is_zero() {
        let a = CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(2.0), cr(3.0), cr(4.0)]);
        assert_eq!(schur_product(&a, &CMatrix::zeros(2, 2)).unwrap(), CMatrix::zeros(2, 2));
    }

    #[test]
    fn schur_shape_mismatch_errors() {
        let a = CMatrix::zeros(2, 2);
        let b = CMatrix::zeros(2, 3);
        assert!(matches!(schur_product(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut x = vec![cr(0.0); 6];
        x[0] = cr(1.0); // |0⟩|0⟩ with m = 2, n = 3
        let rho = partial_trace_b(&x, 2, 3).unwrap();
        assert!((rho - e11(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_of_sec3_x1() {
        let s5 = 5f64.sqrt();
        let mut x = vec![cr(0.0); 16];
        for (k, amp) in [1.6, 1.2, 0.8, 0.6].iter().enumerate() {
            x[5 * k] = cr(amp / s5);
        }
        let rho = partial_trace_b(&x, 4, 4).unwrap();
        for i in 0..4 {
            let want = [1.6f64, 1.2, 0.8, 0.6][i].powi(2) / 5.0;
            assert!((rho[(i, i)] - cr(want)).norm() < 1e-15);
        }
        assert!((rho.trace() - cr(1.0)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_maximally_entangled() {
        let n = 3;
        let mut x = vec![cr(0.0); n * n];
        for j in 0..n {
            x[j * n + j] = cr(1.0 / (n as f64).sqrt());
        }
        let rho = partial_trace_b(&x, n, n).unwrap();
        assert!((rho - identity(n) / cr(n as f64)).norm() < 1e-12);
    }

    #[test]
    fn eigh_matches_squared_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = CMatrix::from_fn(3, 4, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let f = svd(&x).unwrap();
        let (mut evals, _) = eigh(&(&x * x.adjoint())).unwrap();
        evals.reverse(); // descending, like the singular values
        for (ev, sv) in evals.iter().zip(f.s.iter()) {
            assert!((ev - sv * sv).abs() < 1e-10);
        }
    }

    #[test]
    fn general_eigenvalues_of_rotation() {
        let g = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(-1.0), cr(0.0)]);
        let ev = eigenvalues(&g).unwrap();
        // equal magnitudes sort by phase ascending: −i (arg −π/2) first
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn complete_unitary_rows_fills_standard_basis() {
        let mut partial = CMatrix::zeros(4, 4);
        partial[(0, 0)] = cr(1.0);
        partial[(2, 1)] = cr(1.0);
        let full = complete_unitary_rows(&partial, &[true, false, true, false]).unwrap();
        assert!(unitarity_residual(&full) < 1e-12);
        // kept rows untouched
        assert_eq!(full[(0, 0)], cr(1.0));
        assert_eq!(full[(2, 1)], cr(1.0));
        // first fill is the first standard basis vector orthogonal to both
        assert_eq!(full[(1, 2)], cr(1.0));
        assert_eq!(full[(3, 3)], cr(1.0));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [1usize, 2, 5, 8] {
            let u = haar_unitary(&mut rng, n);
            assert!(unitarity_residual(&u) < 1e-12);
        }
    }

    #[test]
    fn numerical_rank_uses_relative_cutoff() {
        let t = tol();
        assert_eq!(numerical_rank(&[1.0, 0.5, 1e-12], &t), 2);
        assert_eq!(numerical_rank(&[1.0, 0.5, 1e-6], &t), 3);
        assert_eq!(numerical_rank(&[], &t), 0);
        assert_eq!(numerical_rank(&[0.0, 0.0], &t), 0);
    }
}
