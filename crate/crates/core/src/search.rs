//! Best-effort certificate finder: seeded alternating optimization over
//! `(U, V, {R_i})` at fixed ancilla dimensions.
//!
//! Each sweep solves three exact block minimizations of
//! `Σ_i ‖U(E₁₁⊗X_i)V − R_i⊗Y_i‖²_F`: the orthogonal-Procrustes update for
//! `U`, the same for `V`, and the normalized partial contraction for each
//! `R_i`. The objective never increases. A result is only ever reported as
//! certified after the independent verifier accepts it; a failed search is
//! explicitly not evidence of impossibility.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{self, UnitaryCertificate};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix, Tolerance};
use crate::states::TransformProblem;

/// Search budget and ancilla dimensions. Identical configs on identical
/// problems give identical outcomes.
#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub seed: u64,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub p: usize,
    pub q: usize,
    pub convergence_eps: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { seed: 0, restarts: 32, max_sweeps: 500, p: 1, q: 1, convergence_eps: 1e-10 }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.p == 0 || self.q == 0 {
            return Err(Error::Precondition(
                "search needs restarts ≥ 1 and ancilla dimensions ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Certified(Box<UnitaryCertificate>),
    /// Best objective value over all restarts. Not evidence of
    /// impossibility: the landscape has local minima.
    NotFound { best_residual: f64 },
}

/// Alternating search for a certificate at `(cfg.p, cfg.q)`.
///
/// Restart 0 starts from the identity frames, the rest from Haar-random
/// unitaries drawn from a ChaCha stream per restart, so the whole search is
/// reproducible from `cfg.seed`.
pub fn search_certificate(
    problem: &TransformProblem,
    cfg: &SearchConfig,
    tol: &Tolerance,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    let (m, n) = (problem.dim_a(), problem.dim_b());
    let (p, q) = (cfg.p, cfg.q);
    let e11 = linalg::e11(p, q);
    let lifted_x: Vec<CMatrix> =
        problem.pairs().iter().map(|pair| linalg::kron(&e11, &pair.x.matrix_form())).collect();
    let y_mats: Vec<CMatrix> = problem.pairs().iter().map(|pair| pair.y.matrix_form()).collect();
    let y_norm_sq: Vec<f64> = y_mats.iter().map(|y| y.norm_squared()).collect();

    let mut best_residual = f64::INFINITY;
    for restart in 0..cfg.restarts {
        let (mut u, mut v) = if restart == 0 {
            (linalg::identity(m * p), linalg::identity(n * q))
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(restart as u64);
            (linalg::haar_unitary(&mut rng, m * p), linalg::haar_unitary(&mut rng, n * q))
        };

        let update_r = |u: &CMatrix, v: &CMatrix| -> Vec<CMatrix> {
            lifted_x
                .iter()
                .zip(&y_mats)
                .zip(&y_norm_sq)
                .map(|((ex, y), &_ynn)| {
                    let z = u * ex * v;
                    let mut contraction = CMatrix::zeros(p, q);
                    for a in 0..p {
                        for b in 0..q {
                            let mut acc = cr(0.0);
                            for r in 0..m {
                                for cdx in 0..n {
                                    acc += y[(r, cdx)].conj() * z[(a * m + r, b * n + cdx)];
                                }
                            }
                            contraction[(a, b)] = acc;
                        }
                    }
                    let norm = contraction.norm();
                    if norm > 1e-300 {
                        contraction / cr(norm)
                    } else {
                        linalg::e11(p, q)
                    }
                })
                .collect()
        };
        let objective = |u: &CMatrix, v: &CMatrix, rs: &[CMatrix]| -> f64 {
            lifted_x
                .iter()
                .zip(&y_mats)
                .zip(rs)
                .map(|((ex, y), r)| (u * ex * v - linalg::kron(r, y)).norm_squared())
                .sum()
        };

        let mut r_list = update_r(&u, &v);
        let mut prev = objective(&u, &v, &r_list);
        for _sweep in 0..cfg.max_sweeps {
            // U-update: maximize Re tr(U† Σ B_i A_i†), A_i = E_i·V, B_i = R_i⊗Y_i
            let mut k_u = CMatrix::zeros(m * p, m * p);
            for (ex, (r, y)) in lifted_x.iter().zip(r_list.iter().zip(&y_mats)) {
                let a_i = ex * &v;
                let b_i = linalg::kron(r, y);
                k_u += b_i * a_i.adjoint();
            }
            u = linalg::unitary_tracemax(&k_u)?.adjoint();

            r_list = update_r(&u, &v);

            // V-update: maximize Re tr(V† Σ C_i† B_i), C_i = U·E_i
            let mut k_v = CMatrix::zeros(n * q, n * q);
            for (ex, (r, y)) in lifted_x.iter().zip(r_list.iter().zip(&y_mats)) {
                let c_i = &u * ex;
                let b_i = linalg::kron(r, y);
                k_v += c_i.adjoint() * b_i;
            }
            v = linalg::unitary_tracemax(&k_v)?.adjoint();

            r_list = update_r(&u, &v);

            let current = objective(&u, &v, &r_list);
            debug_assert!(
                current <= prev + 1e-9,
                "objective must not increase: {prev} -> {current}"
            );
            if prev - current < cfg.convergence_eps {
                prev = current;
                break;
            }
            prev = current;
        }

        best_residual = best_residual.min(prev);
        let cert = UnitaryCertificate { p, q, u, v, r_list };
        if channel::verify_certificate(&cert, problem, tol)?.pass {
            return Ok(SearchOutcome::Certified(Box::new(cert)));
        }
    }
    Ok(SearchOutcome::NotFound { best_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cr};
    use crate::states::{BipartiteState, StatePair};
    use rand::Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn identity_problem() -> TransformProblem {
        let mut amps = vec![cr(0.0); 4];
        amps[0] = cr(0.8);
        amps[3] = c(0.0, 0.6);
        let s = BipartiteState::new(2, 2, amps, &tol()).unwrap();
        TransformProblem::new(
            vec![StatePair { x: s.clone(), y: s, weight: 1.0 }],
            1,
            1,
        )
        .unwrap()
    }

    #[test]
    fn identity_problem_is_certified_at_no_ancilla() {
        let cfg = SearchConfig { restarts: 2, max_sweeps: 100, ..Default::default() };
        match search_certificate(&identity_problem(), &cfg, &tol()).unwrap() {
            SearchOutcome::Certified(cert) => {
                let report =
                    channel::verify_certificate(&cert, &identity_problem(), &tol()).unwrap();
                assert!(report.pass);
            }
            SearchOutcome::NotFound { best_residual } => {
                panic!("identity problem not found, best {best_residual}")
            }
        }
    }

    #[test]
    fn search_is_deterministic() {
        let cfg = SearchConfig { restarts: 3, max_sweeps: 40, p: 1, q: 2, ..Default::default() };
        let problem = crate::channel::tests::example1_problem(1, 2);
        let run = || match search_certificate(&problem, &cfg, &tol()).unwrap() {
            SearchOutcome::Certified(cert) => (true, cert.u[(0, 0)], cert.v[(3, 3)]),
            SearchOutcome::NotFound { best_residual } => {
                (false, cr(best_residual), cr(0.0))
            }
        };
        let a = run();
        let b = run();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.2, b.2);
    }

    #[test]
    fn objective_is_monotone_within_a_sweep_run() {
        // indirectly covered by the debug_assert in search_certificate; this
        // exercises it on a random problem under debug assertions
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let amps: Vec<_> = (0..6)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let (x, _) = BipartiteState::new_normalized(2, 3, amps).unwrap();
        let amps2: Vec<_> = (0..6)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let (y, _) = BipartiteState::new_normalized(2, 3, amps2).unwrap();
        let problem =
            TransformProblem::new(vec![StatePair { x, y, weight: 1.0 }], 2, 2).unwrap();
        let cfg = SearchConfig { restarts: 2, max_sweeps: 60, p: 2, q: 2, ..Default::default() };
        let _ = search_certificate(&problem, &cfg, &tol()).unwrap();
    }
}
