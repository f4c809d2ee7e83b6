//! Problem model: bipartite pure states, transformation problems,
//! mixed-state inputs, and problem-file ingestion.
//!
//! Problem files are UTF-8 JSON:
//!
//! ```json
//! {
//!   "m": 4, "n": 4,
//!   "p_max": 2, "q_max": 2,
//!   "pairs": [ { "x": [["1.6/sqrt5", 0], ...], "y": [...] } ],
//!   "mixed": [ { "components": [[...], ...], "y": [...] } ]
//! }
//! ```
//!
//! Amplitude components are JSON numbers, or strings in a tiny exact grammar
//! (`-`? term (`/` term)* with term = decimal | `sqrt` decimal), so paper
//! values like `1.6/sqrt5` enter without float-literal drift. An amplitude is
//! either a `[re, im]` pair or a bare real. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, C64, CMatrix, CVector, Tolerance};

/// A pure state of an `m×n` bipartite system, stored as the length `m·n`
/// amplitude vector of Eq.-style row-major ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    m: usize,
    n: usize,
    amplitudes: CVector,
}

impl BipartiteState {
    /// Build a state, requiring unit norm within `tol.rel_eps`.
    pub fn new(m: usize, n: usize, amplitudes: Vec<C64>, tol: &Tolerance) -> Result<Self> {
        let v = Self::validated(m, n, amplitudes)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > tol.rel_eps.max(1e-12) * 10.0 {
            return Err(Error::Normalization(format!(
                "state norm is {norm:.12}, expected 1 (pass --normalize to rescale)"
            )));
        }
        Ok(Self { m, n, amplitudes: v })
    }

    /// Build a state, rescaling to unit norm. Returns the factor the input
    /// was divided by.
    pub fn new_normalized(m: usize, n: usize, amplitudes: Vec<C64>) -> Result<(Self, f64)> {
        let v = Self::validated(m, n, amplitudes)?;
        let norm = v.norm();
        if norm <= 1e-12 {
            return Err(Error::Normalization("cannot normalize a zero vector".into()));
        }
        Ok((Self { m, n, amplitudes: v / cr(norm) }, norm))
    }

    fn validated(m: usize, n: usize, amplitudes: Vec<C64>) -> Result<CVector> {
        if m == 0 || n == 0 {
            return Err(Error::Dimension("state dimensions must be positive".into()));
        }
        if amplitudes.len() != m * n {
            return Err(Error::Dimension(format!(
                "amplitude vector has length {}, expected {}·{} = {}",
                amplitudes.len(),
                m,
                n,
                m * n
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("non-finite amplitude".into()));
        }
        Ok(CVector::from_vec(amplitudes))
    }

    pub fn dim_a(&self) -> usize {
        self.m
    }

    pub fn dim_b(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// The `m×n` matrix form `X` with `X[i][j] = amplitude(i·n + j)`.
    pub fn matrix_form(&self) -> CMatrix {
        linalg::vec_to_matrix(self.amplitudes.as_slice(), self.m, self.n)
            .expect("validated on construction")
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Density matrix `|x⟩⟨x|` on the joint system.
    pub fn density(&self) -> CMatrix {
        let dim = self.m * self.n;
        CMatrix::from_fn(dim, dim, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }

    /// Reduced state of system A, `tr_B |x⟩⟨x| = X·X†`.
    pub fn partial_trace_b(&self) -> CMatrix {
        linalg::partial_trace_b(self.amplitudes.as_slice(), self.m, self.n)
            .expect("validated on construction")
    }
}

/// One input→output pair. `weight` is 1 for ordinary pure pairs and records
/// the mixture weight for pairs produced by [`mixed_reduction`]; the
/// transformability criteria ignore it, reports display it.
#[derive(Debug, Clone)]
pub struct StatePair {
    pub x: BipartiteState,
    pub y: BipartiteState,
    pub weight: f64,
}

/// An ordered family of state pairs plus ancilla-dimension bounds for the
/// certificate search.
#[derive(Debug, Clone)]
pub struct TransformProblem {
    pairs: Vec<StatePair>,
    p_max: usize,
    q_max: usize,
}

impl TransformProblem {
    pub fn new(pairs: Vec<StatePair>, p_max: usize, q_max: usize) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Parse("a problem needs at least one state pair".into()));
        }
        if p_max == 0 || q_max == 0 {
            return Err(Error::Precondition("ancilla bounds must be at least 1".into()));
        }
        let (m, n) = (pairs[0].x.dim_a(), pairs[0].x.dim_b());
        for (idx, pair) in pairs.iter().enumerate() {
            for state in [&pair.x, &pair.y] {
                if state.dim_a() != m || state.dim_b() != n {
                    return Err(Error::Dimension(format!(
                        "pair {idx} has dimensions {}x{}, expected {m}x{n}",
                        state.dim_a(),
                        state.dim_b()
                    )));
                }
            }
        }
        Ok(Self { pairs, p_max, q_max })
    }

    pub fn pairs(&self) -> &[StatePair] {
        &self.pairs
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn dim_a(&self) -> usize {
        self.pairs[0].x.dim_a()
    }

    pub fn dim_b(&self) -> usize {
        self.pairs[0].x.dim_b()
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    pub fn q_max(&self) -> usize {
        self.q_max
    }

    pub fn inputs(&self) -> Vec<&BipartiteState> {
        self.pairs.iter().map(|p| &p.x).collect()
    }

    pub fn outputs(&self) -> Vec<&BipartiteState> {
        self.pairs.iter().map(|p| &p.y).collect()
    }
}

/// Mixed-state inputs `A_i = Σ_j x_ij·x_ij†` (components unnormalized, traces
/// summing to 1) with pure target states.
#[derive(Debug, Clone)]
pub struct MixedInputProblem {
    pub mixed_inputs: Vec<Vec<CVector>>,
    pub outputs: Vec<BipartiteState>,
    pub p_max: usize,
    pub q_max: usize,
}

impl MixedInputProblem {
    pub fn validate(&self, tol: &Tolerance) -> Result<()> {
        if self.mixed_inputs.len() != self.outputs.len() {
            return Err(Error::Dimension(
                "each mixed input needs exactly one output state".into(),
            ));
        }
        for (i, components) in self.mixed_inputs.iter().enumerate() {
            if components.is_empty() {
                return Err(Error::Parse(format!("mixed input {i} has no components")));
            }
            let trace: f64 = components.iter().map(|v| v.norm_squared()).sum();
            if (trace - 1.0).abs() > 10.0 * tol.rel_eps.max(1e-12) {
                return Err(Error::Normalization(format!(
                    "mixed input {i} has trace {trace:.12}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Gram matrix `(⟨x_i|x_j⟩)` of a state family. Hermitian, PSD, unit
/// diagonal for normalized states.
pub fn gram_matrix(states: &[&BipartiteState]) -> Result<CMatrix> {
    if states.is_empty() {
        return Err(Error::Dimension("Gram matrix of an empty family".into()));
    }
    let (m, n) = (states[0].dim_a(), states[0].dim_b());
    if states.iter().any(|s| s.dim_a() != m || s.dim_b() != n) {
        return Err(Error::Dimension("Gram matrix needs states of equal dimensions".into()));
    }
    let k = states.len();
    Ok(CMatrix::from_fn(k, k, |i, j| states[i].inner(states[j])))
}

/// Reduce a mixed-input problem to a weighted pure problem: each component
/// `x_ij` becomes the pure pair `(x_ij/‖x_ij‖ → y_i)` carrying weight
/// `‖x_ij‖²`. A tensor TPCP map sends `A_i` to `y_i·y_i†` iff it sends every
/// component ray accordingly, so the pure problem's verdict is the mixed
/// problem's.
pub fn mixed_reduction(problem: &MixedInputProblem, tol: &Tolerance) -> Result<TransformProblem> {
    problem.validate(tol)?;
    let mut pairs = Vec::new();
    for (i, components) in problem.mixed_inputs.iter().enumerate() {
        let y = problem.outputs[i].clone();
        for (j, comp) in components.iter().enumerate() {
            let norm = comp.norm();
            if norm <= tol.abs_eps.max(1e-12) {
                return Err(Error::ZeroComponent { input: i, component: j });
            }
            let x = BipartiteState::new(
                y.dim_a(),
                y.dim_b(),
                (comp / cr(norm)).iter().copied().collect(),
                tol,
            )?;
            pairs.push(StatePair { x, y: y.clone(), weight: norm * norm });
        }
    }
    TransformProblem::new(pairs, problem.p_max, problem.q_max)
}

// ---------------------------------------------------------------------------
// Problem-file parsing
// ---------------------------------------------------------------------------

/// One amplitude component: a JSON number or an exact-expression string.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum NumOrExpr {
    Num(f64),
    Expr(String),
}

impl NumOrExpr {
    fn eval(&self) -> Result<f64> {
        match self {
            NumOrExpr::Num(x) => Ok(*x),
            NumOrExpr::Expr(s) => parse_exact_expr(s),
        }
    }
}

/// An amplitude: `[re, im]` or a bare real component.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum AmplitudeEntry {
    Pair([NumOrExpr; 2]),
    Real(NumOrExpr),
}

impl AmplitudeEntry {
    fn eval(&self) -> Result<C64> {
        match self {
            AmplitudeEntry::Pair([re, im]) => Ok(c(re.eval()?, im.eval()?)),
            AmplitudeEntry::Real(re) => Ok(cr(re.eval()?)),
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct PairFile {
    x: Vec<AmplitudeEntry>,
    y: Vec<AmplitudeEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct MixedFile {
    components: Vec<Vec<AmplitudeEntry>>,
    y: Vec<AmplitudeEntry>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    m: usize,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_max: Option<usize>,
    #[serde(default)]
    pairs: Vec<PairFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mixed: Option<Vec<MixedFile>>,
}

/// Parse `-`? term (`/` term)*, term = decimal | `sqrt` decimal | `sqrt(` decimal `)`.
pub fn parse_exact_expr(s: &str) -> Result<f64> {
    let bad = |msg: &str| Error::Parse(format!("bad amplitude expression {s:?}: {msg}"));
    let mut rest = s.trim();
    let mut sign = 1.0;
    if let Some(r) = rest.strip_prefix('-') {
        sign = -1.0;
        rest = r.trim_start();
    }
    let parse_term = |input: &mut &str| -> Result<f64> {
        let mut t = input.trim_start();
        let sqrt = if let Some(r) = t.strip_prefix("sqrt") {
            t = r.trim_start();
            true
        } else {
            false
        };
        let parens = sqrt && t.starts_with('(');
        if parens {
            t = t[1..].trim_start();
        }
        let end = t
            .find(|ch: char| !(ch.is_ascii_digit() || ch == '.'))
            .unwrap_or(t.len());
        if end == 0 {
            return Err(bad("expected a number"));
        }
        let value: f64 = t[..end].parse().map_err(|_| bad("unparseable number"))?;
        t = t[end..].trim_start();
        if parens {
            t = t.strip_prefix(')').ok_or_else(|| bad("missing closing paren"))?;
        }
        *input = t;
        Ok(if sqrt { value.sqrt() } else { value })
    };
    let mut value = parse_term(&mut rest)?;
    loop {
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        rest = rest.strip_prefix('/').ok_or_else(|| bad("expected '/'"))?;
        let denom = parse_term(&mut rest)?;
        if denom == 0.0 {
            return Err(bad("division by zero"));
        }
        value /= denom;
    }
    Ok(sign * value)
}

/// A parsed problem plus the bookkeeping of any normalization applied.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub problem: TransformProblem,
    /// `(pair index, side, factor)` for every state that was rescaled.
    pub normalized: Vec<(usize, &'static str, f64)>,
}

/// Parse and validate a problem file. Pure pairs and reduced mixed inputs
/// are concatenated, pure pairs first. With `normalize` set, unnormalized
/// states are rescaled and the factors recorded; otherwise they are
/// rejected.
pub fn load_problem(text: &str, normalize: bool, tol: &Tolerance) -> Result<LoadedProblem> {
    let file: ProblemFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let (m, n) = (file.m, file.n);
    let p_max = file.p_max.unwrap_or(1);
    let q_max = file.q_max.unwrap_or(1);

    let eval_state = |entries: &[AmplitudeEntry]| -> Result<Vec<C64>> {
        entries.iter().map(AmplitudeEntry::eval).collect()
    };

    let mut pairs = Vec::new();
    let mut normalized = Vec::new();
    for (idx, pair) in file.pairs.iter().enumerate() {
        let make = |amps: Vec<C64>, side: &'static str, normalized: &mut Vec<(usize, &'static str, f64)>| {
            if normalize {
                let (state, factor) = BipartiteState::new_normalized(m, n, amps)?;
                if (factor - 1.0).abs() > tol.rel_eps.max(1e-12) * 10.0 {
                    normalized.push((idx, side, factor));
                }
                Ok(state)
            } else {
                BipartiteState::new(m, n, amps, tol)
            }
        };
        let x = make(eval_state(&pair.x)?, "x", &mut normalized)?;
        let y = make(eval_state(&pair.y)?, "y", &mut normalized)?;
        pairs.push(StatePair { x, y, weight: pair.weight.unwrap_or(1.0) });
    }

    if let Some(mixed) = &file.mixed {
        let mut mixed_inputs = Vec::new();
        let mut outputs = Vec::new();
        for entry in mixed {
            let components = entry
                .components
                .iter()
                .map(|comp| Ok(CVector::from_vec(eval_state(comp)?)))
                .collect::<Result<Vec<_>>>()?;
            for (ci, comp) in components.iter().enumerate() {
                if comp.len() != m * n {
                    return Err(Error::Dimension(format!(
                        "mixed component {ci} has length {}, expected {}",
                        comp.len(),
                        m * n
                    )));
                }
            }
            mixed_inputs.push(components);
            outputs.push(BipartiteState::new(m, n, eval_state(&entry.y)?, tol)?);
        }
        let reduced = mixed_reduction(
            &MixedInputProblem { mixed_inputs, outputs, p_max, q_max },
            tol,
        )?;
        pairs.extend(reduced.pairs().iter().cloned());
    }

    Ok(LoadedProblem { problem: TransformProblem::new(pairs, p_max, q_max)?, normalized })
}

/// Serialize a problem back to the file format (numeric amplitudes).
pub fn serialize_problem(problem: &TransformProblem) -> String {
    let to_entries = |state: &BipartiteState| -> Vec<AmplitudeEntry> {
        state
            .amplitudes()
            .iter()
            .map(|z| AmplitudeEntry::Pair([NumOrExpr::Num(z.re), NumOrExpr::Num(z.im)]))
            .collect()
    };
    let file = ProblemFile {
        m: problem.dim_a(),
        n: problem.dim_b(),
        p_max: Some(problem.p_max()),
        q_max: Some(problem.q_max()),
        pairs: problem
            .pairs()
            .iter()
            .map(|p| PairFile {
                x: to_entries(&p.x),
                y: to_entries(&p.y),
                weight: if (p.weight - 1.0).abs() > 1e-15 { Some(p.weight) } else { None },
            })
            .collect(),
        mixed: None,
    };
    serde_json::to_string_pretty(&file).expect("problem serialization cannot fail")
}
