use nalgebra::DMatrix;

use crate::behavior::{Behavior, Scenario};
use crate::conic::{solve_lp, LpProblem, Sense, SolverStatus, Tolerances};
use crate::error::{Error, Result};

const MAX_STRATEGIES: usize = 10_000_000;
const LOCAL_TOL: f64 = 1e-9;

/// Outcome per setting for each party.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn probability(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        if self.alice[x] == a && self.bob[y] == b {
            1.0
        } else {
            0.0
        }
    }

    pub fn behavior(&self, s: Scenario) -> Result<Behavior> {
        Behavior::from_fn(s, |a, b, x, y| self.probability(a, b, x, y))
    }
}

fn party_strategies(m: usize, o: usize) -> Vec<Vec<usize>> {
    let count = o.pow(m as u32);
    (0..count)
        .map(|mut k| {
            (0..m)
                .map(|_| {
                    let v = k % o;
                    k /= o;
                    v
                })
                .collect()
        })
        .collect()
}

/// All `o_A^{m_A} · o_B^{m_B}` deterministic strategies, Alice-major.
pub fn deterministic_strategies(s: &Scenario) -> Result<Vec<DeterministicStrategy>> {
    let na = (s.oa as f64).powi(s.ma as i32);
    let nb = (s.ob as f64).powi(s.mb as i32);
    if na * nb > MAX_STRATEGIES as f64 {
        return Err(Error::Invalid(format!("{} deterministic strategies exceed the limit", na * nb)));
    }
    let sa = party_strategies(s.ma, s.oa);
    let sb = party_strategies(s.mb, s.ob);
    let mut out = Vec::with_capacity(sa.len() * sb.len());
    for a in &sa {
        for b in &sb {
            out.push(DeterministicStrategy { alice: a.clone(), bob: b.clone() });
        }
    }
    Ok(out)
}

/// Result of the white-noise LP.
#[derive(Debug, Clone)]
pub struct LocalAnalysis {
    /// Minimal mixing weight, allowed down to −1; negative means strictly inside.
    pub signed_w: f64,
    /// `Σ q_μ D_μ = (1 − w) p + w u`.
    pub weights: Vec<f64>,
    pub strategies: Vec<DeterministicStrategy>,
}

/// min w s.t. (1 − w) p + w u = Σ q_μ D_μ, q ≥ 0, w ∈ [−1, 1].
pub fn local_analysis(b: &Behavior, tol: &Tolerances) -> Result<LocalAnalysis> {
    let s = b.scenario;
    let strategies = deterministic_strategies(&s)?;
    let n = strategies.len();
    let rows = s.len();
    let u = 1.0 / (s.oa * s.ob) as f64;
    // Columns: q (n), w+, w−, slack for w− ≤ 1.
    let cols = n + 3;
    let mut a = DMatrix::zeros(rows + 1, cols);
    let mut rhs = vec![0.0; rows + 1];
    for x in 0..s.ma {
        for y in 0..s.mb {
            for aa in 0..s.oa {
                for bb in 0..s.ob {
                    let r = s.index(aa, bb, x, y);
                    for (k, d) in strategies.iter().enumerate() {
                        a[(r, k)] = d.probability(aa, bb, x, y);
                    }
                    let diff = b.p(aa, bb, x, y) - u;
                    a[(r, n)] = diff;
                    a[(r, n + 1)] = -diff;
                    rhs[r] = b.p(aa, bb, x, y);
                }
            }
        }
    }
    a[(rows, n + 1)] = 1.0;
    a[(rows, n + 2)] = 1.0;
    rhs[rows] = 1.0;
    let mut c = vec![0.0; cols];
    c[n] = 1.0;
    c[n + 1] = -1.0;
    let sol = solve_lp(&LpProblem { sense: Sense::Minimize, c, a, b: rhs }, tol);
    if sol.status != SolverStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    let w = sol.x[n] - sol.x[n + 1];
    Ok(LocalAnalysis { signed_w: w, weights: sol.x[..n].to_vec(), strategies })
}

pub fn noise_robustness(b: &Behavior) -> Result<f64> {
    Ok(local_analysis(b, &Tolerances::default())?.signed_w.max(0.0))
}

/// `(is_local, w*)`.
pub fn local_membership(b: &Behavior) -> Result<(bool, f64)> {
    let w = noise_robustness(b)?;
    Ok((w <= LOCAL_TOL, w))
}
