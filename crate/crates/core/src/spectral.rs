//! Spectrum-based necessary conditions: rank divisibility, the peeling
//! algorithm deciding single-pair transformability from singular values, and
//! the cross-pair eigenvalue condition.
//!
//! Peeling decides whether the input spectrum is a union of scaled copies of
//! the output spectrum: with `A₁ = {α₁ ≥ … ≥ α_p}` and output values
//! `β₁ ≥ … ≥ β_q`, the ratio `r = p/q` must be an integer, and for
//! `i = 1..r` the scale `γᵢ = max(Aᵢ)/β₁` must peel the sub-multiset
//! `{βⱼγᵢ}` off `Aᵢ`. Feasible iff the loop ends with nothing left.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, CMatrix, Tolerance};

/// Largest eigenvalue-multiset size the cross-pair partition search will
/// brute-force; beyond this the test reports inconclusive rather than risk a
/// wrong verdict.
pub const PARTITION_SEARCH_CAP: usize = 12;

/// A multiset of spectrum values with a label recording where it came from.
/// Stored sorted by magnitude descending, then phase ascending.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralProfile {
    pub values: Vec<[f64; 2]>,
    pub source: String,
}

impl SpectralProfile {
    pub fn from_complex(mut values: Vec<C64>, source: impl Into<String>) -> Self {
        linalg::sort_complex_canonical(&mut values);
        Self { values: values.iter().map(|z| [z.re, z.im]).collect(), source: source.into() }
    }

    pub fn from_reals(mut values: Vec<f64>, source: impl Into<String>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values: values.iter().map(|&x| [x, 0.0]).collect(), source: source.into() }
    }
}

/// Outcome of the peeling algorithm: the scale factors on success, the
/// 1-based step index at which peeling failed otherwise (0 when the count
/// ratio is not an integer).
#[derive(Debug, Clone, Serialize)]
pub struct RatioWitness {
    pub gammas: Vec<f64>,
    pub feasible: bool,
    pub failure_step: Option<usize>,
}

/// Decide whether `alpha` is a union of scaled copies of `beta`.
///
/// Both inputs are multisets of strictly positive reals (order irrelevant).
/// Infeasibility is a value, not an error.
pub fn peel(alpha: &[f64], beta: &[f64], tol: &Tolerance) -> Result<RatioWitness> {
    if alpha.is_empty() || beta.is_empty() {
        return Err(Error::Precondition("peel needs nonempty spectra".into()));
    }
    if alpha.iter().chain(beta).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Precondition("peel needs strictly positive finite values".into()));
    }
    if alpha.len() % beta.len() != 0 {
        return Ok(RatioWitness { gammas: vec![], feasible: false, failure_step: Some(0) });
    }
    let r = alpha.len() / beta.len();
    let mut remaining: Vec<f64> = alpha.to_vec();
    remaining.sort_by(|a, b| b.total_cmp(a));
    let mut beta_sorted: Vec<f64> = beta.to_vec();
    beta_sorted.sort_by(|a, b| b.total_cmp(a));

    let mut gammas = Vec::with_capacity(r);
    for step in 1..=r {
        let gamma = remaining[0] / beta_sorted[0];
        for &b in &beta_sorted {
            let target = b * gamma;
            // closest remaining value within tolerance
            let best = remaining
                .iter()
                .enumerate()
                .filter(|(_, &a)| tol.reals_match(a, target))
                .min_by(|(_, a), (_, b)| (*a - target).abs().total_cmp(&(*b - target).abs()))
                .map(|(idx, _)| idx);
            match best {
                Some(idx) => {
                    remaining.remove(idx);
                }
                None => {
                    return Ok(RatioWitness {
                        gammas,
                        feasible: false,
                        failure_step: Some(step),
                    })
                }
            }
        }
        gammas.push(gamma);
    }
    debug_assert!(remaining.is_empty());
    Ok(RatioWitness { gammas, feasible: true, failure_step: None })
}

/// Outcome of the rank-divisibility necessary condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RankCheck {
    /// rank(X) = ℓ·rank(Y); carries ℓ.
    Divisible { ell: usize, rank_x: usize, rank_y: usize },
    /// rank(Y) does not divide rank(X): no tensor TPCP map exists.
    Indivisible { rank_x: usize, rank_y: usize },
}

/// The rank of `X` must be a multiple of the rank of `Y`.
pub fn rank_divisibility(x: &CMatrix, y: &CMatrix, tol: &Tolerance) -> Result<RankCheck> {
    let sx = linalg::svd(x)?;
    let sy = linalg::svd(y)?;
    let rank_x = linalg::numerical_rank(&sx.s, tol);
    let rank_y = linalg::numerical_rank(&sy.s, tol);
    if rank_y == 0 {
        return Err(Error::ZeroMatrix("output matrix has numerical rank 0".into()));
    }
    if rank_x % rank_y == 0 {
        Ok(RankCheck::Divisible { ell: rank_x / rank_y, rank_x, rank_y })
    } else {
        Ok(RankCheck::Indivisible { rank_x, rank_y })
    }
}

/// Witness for a cross-pair impossibility: the two nonzero eigenvalue
/// multisets admit no block partition related by scalar factors. Re-running
/// the brute-force search on these values reproduces the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CrossPairWitness {
    pub pair_i: usize,
    pub pair_j: usize,
    pub x_eigenvalues: SpectralProfile,
    pub y_eigenvalues: SpectralProfile,
    pub blocks: usize,
}

#[derive(Debug, Clone)]
pub enum CrossPairOutcome {
    /// A γ-partition exists; carries one scale per block.
    Pass { gammas: Vec<C64> },
    Impossible(CrossPairWitness),
    /// The test could not decide (size cap, or zero eigenvalues absorb the
    /// count mismatch). Never a false Impossible.
    Inconclusive(String),
}

/// Cross-pair eigenvalue condition: the nonzero eigenvalues of `X_i·X_j†`
/// must be the nonzero eigenvalues of `Y_i·Y_j†` scaled by complex factors
/// `γ₁..γ_ℓ` (one per block). `pair_i`/`pair_j` only label the witness.
pub fn cross_pair_test(
    xi: &CMatrix,
    xj: &CMatrix,
    yi: &CMatrix,
    yj: &CMatrix,
    pair_i: usize,
    pair_j: usize,
    tol: &Tolerance,
) -> Result<CrossPairOutcome> {
    if xi.shape() != xj.shape() || yi.shape() != yj.shape() || xi.shape() != yi.shape() {
        return Err(Error::Dimension("cross-pair test needs equal-shaped matrices".into()));
    }
    let x_prod = xi * xj.adjoint();
    let y_prod = yi * yj.adjoint();
    let x_all = linalg::eigenvalues(&x_prod)?;
    let y_all = linalg::eigenvalues(&y_prod)?;

    // Nonzero eigenvalues. States are normalized, so the zero cutoff is
    // absolute; the scale factor max(1, |λ|_max) guards unnormalized use.
    let keep = |vals: &[C64]| -> (Vec<C64>, bool) {
        let scale = vals.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
        let kept: Vec<C64> =
            vals.iter().copied().filter(|z| z.norm() > tol.abs_eps * scale).collect();
        let dropped = kept.len() < vals.len();
        (kept, dropped)
    };
    let (xs, x_dropped) = keep(&x_all);
    let (ys, y_dropped) = keep(&y_all);

    let witness = || CrossPairWitness {
        pair_i,
        pair_j,
        x_eigenvalues: SpectralProfile::from_complex(
            xs.clone(),
            format!("X{}X{}*", pair_i + 1, pair_j + 1),
        ),
        y_eigenvalues: SpectralProfile::from_complex(
            ys.clone(),
            format!("Y{}Y{}*", pair_i + 1, pair_j + 1),
        ),
        blocks: if ys.is_empty() { 0 } else { xs.len() / ys.len() },
    };

    if ys.is_empty() {
        // With tr R_iR_i† = 1 every block scale has |γ| ≤ 1, so a zero
        // output spectrum forces a zero input spectrum.
        return Ok(if xs.is_empty() {
            CrossPairOutcome::Pass { gammas: vec![] }
        } else {
            CrossPairOutcome::Impossible(witness())
        });
    }
    if xs.is_empty() {
        // ℓ = 0 scaled copies: R_i·R_j† can be nilpotent.
        return Ok(CrossPairOutcome::Pass { gammas: vec![] });
    }
    if xs.len() % ys.len() != 0 {
        if x_dropped || y_dropped {
            return Ok(CrossPairOutcome::Inconclusive(
                "eigenvalue counts do not divide and zero eigenvalues were discarded".into(),
            ));
        }
        return Ok(CrossPairOutcome::Impossible(witness()));
    }
    if xs.len() > PARTITION_SEARCH_CAP {
        return Ok(CrossPairOutcome::Inconclusive(format!(
            "multiset of size {} exceeds brute-force bound {}",
            xs.len(),
            PARTITION_SEARCH_CAP
        )));
    }

    match find_gamma_partition(&xs, &ys, tol) {
        Some(mut gammas) => {
            linalg::sort_complex_canonical(&mut gammas);
            Ok(CrossPairOutcome::Pass { gammas })
        }
        None => Ok(CrossPairOutcome::Impossible(witness())),
    }
}

/// Brute-force search for a partition of `xs` into `xs.len()/ys.len()` blocks,
/// each equal to `γ·ys` for some complex `γ`. The largest-magnitude unused
/// value anchors each new block, so every candidate γ is the anchor divided
/// by one of the largest-magnitude elements of `ys`.
pub fn find_gamma_partition(xs: &[C64], ys: &[C64], tol: &Tolerance) -> Option<Vec<C64>> {
    let mut xs_sorted = xs.to_vec();
    linalg::sort_complex_canonical(&mut xs_sorted);
    let mut ys_sorted = ys.to_vec();
    linalg::sort_complex_canonical(&mut ys_sorted);

    let y_max = ys_sorted[0].norm();
    let anchors: Vec<C64> = ys_sorted
        .iter()
        .copied()
        .filter(|y| tol.reals_match(y.norm(), y_max))
        .collect();

    let mut used = vec![false; xs_sorted.len()];
    let mut gammas = Vec::new();
    if assign_blocks(&xs_sorted, &ys_sorted, &anchors, &mut used, &mut gammas, tol) {
        Some(gammas)
    } else {
        None
    }
}

fn assign_blocks(
    xs: &[C64],
    ys: &[C64],
    anchors: &[C64],
    used: &mut [bool],
    gammas: &mut Vec<C64>,
    tol: &Tolerance,
) -> bool {
    let anchor_idx = match used.iter().position(|&u| !u) {
        Some(i) => i,
        None => return true,
    };
    let anchor = xs[anchor_idx];
    let mut tried: Vec<C64> = Vec::new();
    for &w in anchors {
        let gamma = anchor / w;
        if tried.iter().any(|g| tol.values_match(*g, gamma)) {
            continue;
        }
        tried.push(gamma);
        let mut taken = Vec::new();
        if take_block(xs, ys, gamma, used, &mut taken, 0, tol) {
            gammas.push(gamma);
            if assign_blocks(xs, ys, anchors, used, gammas, tol) {
                return true;
            }
            gammas.pop();
            for idx in taken {
                used[idx] = false;
            }
        }
    }
    false
}

/// Try to mark one unused x for each `γ·ys[pos..]`, backtracking over
/// near-tie candidates. On failure `used` is restored and `taken` cleared.
fn take_block(
    xs: &[C64],
    ys: &[C64],
    gamma: C64,
    used: &mut [bool],
    taken: &mut Vec<usize>,
    pos: usize,
    tol: &Tolerance,
) -> bool {
    if pos == ys.len() {
        return true;
    }
    let target = gamma * ys[pos];
    for idx in 0..xs.len() {
        if used[idx] || !tol.values_match(xs[idx], target) {
            continue;
        }
        used[idx] = true;
        taken.push(idx);
        if take_block(xs, ys, gamma, used, taken, pos + 1, tol) {
            return true;
        }
        used[idx] = false;
        taken.pop();
    }
    false
}
