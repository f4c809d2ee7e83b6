//! Single-party pure-state transformability via correlation-matrix
//! completion: a TPCP map carrying each `x_i` to `y_i` exists iff there is a
//! PSD, unit-diagonal `M` with `G_X = M ∘ G_Y`.
//!
//! Entries of `M` are forced to `G_X[i][j]/G_Y[i][j]` wherever `G_Y` is
//! nonzero; the remaining entries form a completion problem solved by
//! Dykstra's alternating projections between the PSD cone and the affine set
//! of the forced entries. Infeasibility is declared only through a
//! PSD-violating fully-forced principal submatrix; the solver alone never
//! proves impossibility.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, cr, C64, CMatrix, CVector, Tolerance};

/// The partially forced correlation matrix of a completion instance.
#[derive(Debug, Clone)]
pub struct CorrelationCompletion {
    /// Upper-triangle forced entries `(i, j, M_ij)` with `i < j`.
    pub forced: Vec<(usize, usize, C64)>,
    /// Upper-triangle index pairs left free by zeros of `G_Y`.
    pub free_pattern: Vec<(usize, usize)>,
    /// The completed matrix, when the solver produced one.
    pub matrix: Option<CMatrix>,
    pub min_eigenvalue: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Witness of a zero-pattern violation: `G_Y[i][j] = 0` forces
/// `G_X[i][j] = 0`, and this entry breaks it.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroPatternWitness {
    pub row: usize,
    pub col: usize,
    pub g_x: [f64; 2],
    pub g_y: [f64; 2],
}

#[derive(Debug, Clone)]
pub enum ZeroPatternOutcome {
    Pass,
    Impossible(ZeroPatternWitness),
}

/// `x_i† x_j = 0` whenever `y_i† y_j = 0` is necessary for any completion.
pub fn zero_pattern_check(
    g_x: &CMatrix,
    g_y: &CMatrix,
    tol: &Tolerance,
) -> Result<ZeroPatternOutcome> {
    if g_x.shape() != g_y.shape() || g_x.nrows() != g_x.ncols() {
        return Err(Error::Dimension("zero-pattern check needs equal square Grams".into()));
    }
    let k = g_x.nrows();
    for i in 0..k {
        for j in 0..k {
            if g_y[(i, j)].norm() <= tol.abs_eps && g_x[(i, j)].norm() > tol.abs_eps {
                return Ok(ZeroPatternOutcome::Impossible(ZeroPatternWitness {
                    row: i,
                    col: j,
                    g_x: [g_x[(i, j)].re, g_x[(i, j)].im],
                    g_y: [g_y[(i, j)].re, g_y[(i, j)].im],
                }));
            }
        }
    }
    Ok(ZeroPatternOutcome::Pass)
}

/// A fully-forced principal submatrix with a negative eigenvalue: every
/// completion contains it, so none is PSD.
#[derive(Debug, Clone, Serialize)]
pub struct ForcedSubmatrixWitness {
    pub indices: Vec<usize>,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub enum CompletionOutcome {
    Feasible(CorrelationCompletion),
    Infeasible { completion: CorrelationCompletion, witness: ForcedSubmatrixWitness },
    Inconclusive { completion: CorrelationCompletion, note: String },
}

/// Complete the forced pattern to a correlation matrix, or certify that no
/// completion exists, or give up honestly.
///
/// Free entries start at 0 and the iteration is entirely deterministic, so
/// identical inputs give identical results.
pub fn complete_correlation(
    g_x: &CMatrix,
    g_y: &CMatrix,
    tol: &Tolerance,
    max_iters: usize,
) -> Result<CompletionOutcome> {
    if g_x.shape() != g_y.shape() || g_x.nrows() != g_x.ncols() {
        return Err(Error::Dimension("completion needs equal square Grams".into()));
    }
    let k = g_x.nrows();
    let mut forced = Vec::new();
    let mut free_pattern = Vec::new();
    let mut base = CMatrix::zeros(k, k);
    for i in 0..k {
        base[(i, i)] = cr(1.0);
        for j in (i + 1)..k {
            if g_y[(i, j)].norm() > tol.abs_eps {
                let value = g_x[(i, j)] / g_y[(i, j)];
                forced.push((i, j, value));
                base[(i, j)] = value;
                base[(j, i)] = value.conj();
            } else {
                free_pattern.push((i, j));
            }
        }
    }

    let project_affine = |mut m: CMatrix| -> CMatrix {
        // Hermitize, then pin diagonal and forced entries.
        m = (&m + m.adjoint()) * cr(0.5);
        for i in 0..k {
            m[(i, i)] = cr(1.0);
        }
        for &(i, j, v) in &forced {
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        m
    };
    let project_psd = |m: &CMatrix| -> Result<CMatrix> {
        let herm = (m + m.adjoint()) * cr(0.5);
        let (vals, vecs) = linalg::eigh(&herm)?;
        let clipped = CVector::from_vec(vals.iter().map(|&v| cr(v.max(0.0))).collect());
        Ok(&vecs * CMatrix::from_diagonal(&clipped) * vecs.adjoint())
    };

    // No free entries: M is uniquely forced, only its PSD-ness is in question.
    if free_pattern.is_empty() {
        let (vals, _) = linalg::eigh(&base)?;
        let min_eig = vals[0];
        let completion = CorrelationCompletion {
            forced: forced.clone(),
            free_pattern,
            matrix: Some(base.clone()),
            min_eigenvalue: min_eig,
            residual: 0.0,
            iterations: 0,
        };
        if min_eig >= -tol.psd_eps {
            return Ok(CompletionOutcome::Feasible(completion));
        }
        let witness = forced_submatrix_certificate(&base, &forced, k, tol)?
            .unwrap_or(ForcedSubmatrixWitness {
                indices: (0..k).collect(),
                min_eigenvalue: min_eig,
            });
        return Ok(CompletionOutcome::Infeasible { completion, witness });
    }

    // Dykstra's alternating projections between the PSD cone and the affine
    // set of forced entries.
    let mut x = base.clone();
    let mut p = CMatrix::zeros(k, k);
    let mut q = CMatrix::zeros(k, k);
    let mut residuals: Vec<f64> = Vec::with_capacity(max_iters.min(16 * 1024));
    let mut iterations = 0;
    for iter in 0..max_iters {
        iterations = iter + 1;
        let y = project_psd(&(&x + &p))?;
        p = &x + &p - &y;
        let x_new = project_affine(&y + &q);
        q = &y + &q - &x_new;
        let residual = (&x_new - &y).norm();
        residuals.push(residual);
        x = x_new;
        if residual < 0.1 * tol.abs_eps {
            break;
        }
    }
    let residual = residuals.last().copied().unwrap_or(f64::INFINITY);
    let (vals, _) = linalg::eigh(&x)?;
    let min_eig = vals[0];
    let completion = CorrelationCompletion {
        forced: forced.clone(),
        free_pattern: free_pattern.clone(),
        matrix: Some(x.clone()),
        min_eigenvalue: min_eig,
        residual,
        iterations,
    };

    if min_eig >= -tol.psd_eps && residual <= 10.0 * tol.abs_eps {
        return Ok(CompletionOutcome::Feasible(completion));
    }

    // Residual stalled above threshold over the final stretch?
    let window = residuals.len().div_ceil(10).max(1);
    let stalled = residuals.len() >= window
        && residuals[residuals.len() - window..].iter().all(|&r| r > 10.0 * tol.abs_eps);
    if stalled {
        if let Some(witness) = forced_submatrix_certificate(&base, &forced, k, tol)? {
            return Ok(CompletionOutcome::Infeasible { completion, witness });
        }
    }
    Ok(CompletionOutcome::Inconclusive {
        completion,
        note: format!(
            "no convergence within {iterations} iterations (residual {residual:.3e}, min eigenvalue {min_eig:.3e}) and no infeasibility certificate"
        ),
    })
}

/// Search the fully-forced principal submatrices (forced pairs and clique
/// components of the forced graph) for one with an eigenvalue below
/// `−psd_eps`.
fn forced_submatrix_certificate(
    base: &CMatrix,
    forced: &[(usize, usize, C64)],
    k: usize,
    tol: &Tolerance,
) -> Result<Option<ForcedSubmatrixWitness>> {
    let mut adj = vec![vec![false; k]; k];
    for &(i, j, _) in forced {
        adj[i][j] = true;
        adj[j][i] = true;
    }
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for &(i, j, _) in forced {
        candidates.push(vec![i, j]);
    }
    // connected components that happen to be cliques
    let mut seen = vec![false; k];
    for start in 0..k {
        if seen[start] {
            continue;
        }
        let mut component = vec![start];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(node) = stack.pop() {
            for next in 0..k {
                if adj[node][next] && !seen[next] {
                    seen[next] = true;
                    component.push(next);
                    stack.push(next);
                }
            }
        }
        if component.len() > 2 {
            component.sort_unstable();
            let clique = component
                .iter()
                .all(|&a| component.iter().all(|&b| a == b || adj[a][b]));
            if clique {
                candidates.push(component);
            }
        }
    }
    for indices in candidates {
        let sub = CMatrix::from_fn(indices.len(), indices.len(), |r, cdx| {
            base[(indices[r], indices[cdx])]
        });
        let (vals, _) = linalg::eigh(&sub)?;
        if vals[0] < -tol.psd_eps {
            return Ok(Some(ForcedSubmatrixWitness { indices, min_eigenvalue: vals[0] }));
        }
    }
    Ok(None)
}

/// Witness carried by a single-party impossibility.
#[derive(Debug, Clone, Serialize)]
pub enum GramWitness {
    ZeroPattern(ZeroPatternWitness),
    ForcedSubmatrix(ForcedSubmatrixWitness),
}

#[derive(Debug, Clone)]
pub enum SinglePartyOutcome {
    /// The criterion is if-and-only-if: a feasible M certifies the map.
    Certified { m: CMatrix },
    Impossible(GramWitness),
    Inconclusive(String),
}

/// Default iteration budget for the completion solver.
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Decide single-party transformability of `xs → ys` via the correlation
/// criterion.
pub fn single_party_transformable(
    xs: &[CVector],
    ys: &[CVector],
    tol: &Tolerance,
    max_iters: usize,
) -> Result<SinglePartyOutcome> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension("input and output families differ in size".into()));
    }
    let g_x = linalg::gram_of_vectors(xs)?;
    let g_y = linalg::gram_of_vectors(ys)?;
    if let ZeroPatternOutcome::Impossible(w) = zero_pattern_check(&g_x, &g_y, tol)? {
        return Ok(SinglePartyOutcome::Impossible(GramWitness::ZeroPattern(w)));
    }
    match complete_correlation(&g_x, &g_y, tol, max_iters)? {
        CompletionOutcome::Feasible(completion) => Ok(SinglePartyOutcome::Certified {
            m: completion.matrix.expect("feasible completion carries its matrix"),
        }),
        CompletionOutcome::Infeasible { witness, .. } => {
            Ok(SinglePartyOutcome::Impossible(GramWitness::ForcedSubmatrix(witness)))
        }
        CompletionOutcome::Inconclusive { note, .. } => Ok(SinglePartyOutcome::Inconclusive(note)),
    }
}
