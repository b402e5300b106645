use serde::{Deserialize, Serialize};

use super::moments::{moment_structure, CgTerm, Level, MomentStructure};
use crate::behavior::{Behavior, Scenario};
use crate::conic::{solve_sdp, SdpConstraint, SdpProblem, Sense, SolverStatus, SparseSym, Tolerances};
use crate::error::{Error, Result};

/// Linear functional `constant + Σ coefficients·P` on behavior entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellFunctional {
    pub scenario: Scenario,
    pub constant: f64,
    pub coefficients: Vec<f64>,
}

impl BellFunctional {
    pub fn evaluate(&self, b: &Behavior) -> f64 {
        self.constant + self.coefficients.iter().zip(&b.probs).map(|(c, p)| c * p).sum::<f64>()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuessingCertificate {
    /// Guessing probability, clamped to [0, 1].
    pub value: f64,
    /// Optimal Eve decomposition value.
    pub primal_value: f64,
    /// Bell-functional upper bound.
    pub dual_bound: f64,
    pub bell: BellFunctional,
    pub x_star: usize,
    pub eps: f64,
    pub level: Level,
    pub status: SolverStatus,
    pub iterations: usize,
}

fn class_matrices(ms: &MomentStructure) -> Vec<SparseSym> {
    let mut f = vec![SparseSym::new(); ms.n_classes];
    let n = ms.size();
    for i in 0..n {
        for j in i..n {
            if let Some(k) = ms.cells[i][j] {
                f[k].push(i, j, 1.0);
            }
        }
    }
    f
}

/// Reusable problem skeleton for one scenario, level and `x*`.
#[derive(Debug, Clone)]
pub struct GuessingProblem {
    pub structure: MomentStructure,
    pub x_star: usize,
    f: Vec<SparseSym>,
    objective: Vec<Vec<(usize, f64)>>,
}

impl GuessingProblem {
    pub fn new(s: &Scenario, x_star: usize, level: Level) -> Result<Self> {
        if x_star >= s.ma {
            return Err(Error::OutOfRange { name: "x_star", value: x_star as f64 });
        }
        let structure = moment_structure(s, level)?;
        let f = class_matrices(&structure);
        let alice_class = |a: usize| {
            structure
                .cg
                .iter()
                .find(|(t, _)| *t == CgTerm::Alice { x: x_star, a })
                .map(|(_, k)| *k)
                .expect("alice marginal class")
        };
        let norm = structure.cg[0].1;
        let mut objective = Vec::with_capacity(s.oa);
        for e in 0..s.oa {
            if e + 1 < s.oa {
                objective.push(vec![(alice_class(e), 1.0)]);
            } else {
                let mut v = vec![(norm, 1.0)];
                v.extend((0..s.oa - 1).map(|a| (alice_class(a), -1.0)));
                objective.push(v);
            }
        }
        Ok(GuessingProblem { structure, x_star, f, objective })
    }

    /// Moment-side maximization is the dual of this minimization over Bell functionals.
    pub fn build(&self, b: &Behavior, eps: f64) -> Result<SdpProblem> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::OutOfRange { name: "eps", value: eps });
        }
        if b.scenario != self.structure.scenario {
            return Err(Error::Invalid("behavior scenario does not match the problem".into()));
        }
        let ms = &self.structure;
        let oa = ms.scenario.oa;
        let n = ms.size();
        let robust = eps > 0.0;
        let n_cg = ms.cg.len();
        let mut cg_of_class = vec![None; ms.n_classes];
        for (f, (_, k)) in ms.cg.iter().enumerate() {
            cg_of_class[*k] = Some(f);
        }
        let blocks = if robust { vec![n; oa + 1] } else { vec![n; oa] };
        let free_dim = if robust { n_cg + 1 } else { n_cg };
        let mut p = SdpProblem::new(Sense::Minimize, blocks, 0, free_dim);
        let values = ms.cg_values(b);
        for (f, v) in values.iter().enumerate() {
            p.c_free[f] = (1.0 - eps) * v;
        }
        if robust {
            p.c_free[n_cg] = 1.0;
        }
        for e in 0..oa {
            let mut rhs = vec![0.0; ms.n_classes];
            for &(k, c) in &self.objective[e] {
                rhs[k] += c;
            }
            for k in 0..ms.n_classes {
                let mut a = self.f[k].clone();
                a.entries.iter_mut().for_each(|t| t.2 = -t.2);
                let free = cg_of_class[k].map(|f| vec![(f, 1.0)]).unwrap_or_default();
                p.constraints.push(SdpConstraint { psd: vec![(e, a)], lp: vec![], free, rhs: rhs[k] });
            }
        }
        if robust {
            for k in 0..ms.n_classes {
                let mut a = self.f[k].clone();
                a.entries.iter_mut().for_each(|t| t.2 = -t.2);
                let mut free = cg_of_class[k].map(|f| vec![(f, -eps)]).unwrap_or_default();
                if k == ms.cg[0].1 {
                    free.push((n_cg, 1.0));
                }
                p.constraints.push(SdpConstraint { psd: vec![(oa, a)], lp: vec![], free, rhs: 0.0 });
            }
        }
        Ok(p)
    }

    pub fn solve(&self, b: &Behavior, eps: f64, tol: &Tolerances) -> Result<GuessingCertificate> {
        let problem = self.build(b, eps)?;
        let sol = solve_sdp(&problem, tol);
        match sol.status {
            SolverStatus::Optimal | SolverStatus::Inaccurate => {}
            SolverStatus::PrimalInfeasible | SolverStatus::DualInfeasible => return Err(Error::OutsideQuantumSet),
            other => return Err(Error::Solver(other)),
        }
        let ms = &self.structure;
        let n_cg = ms.cg.len();
        let coeffs: Vec<f64> = sol.u[..n_cg].iter().map(|u| u * (1.0 - eps)).collect();
        let mut extra = 0.0;
        if eps > 0.0 {
            extra = sol.u[n_cg];
        }
        let (constant, coefficients) = ms.expand_functional(&coeffs);
        let bell = BellFunctional { scenario: ms.scenario, constant: constant + extra, coefficients };
        let dual_bound = bell.evaluate(b);
        // An unattained Bell-side optimum leaves only the moment side trustworthy.
        let raw = if sol.status == SolverStatus::Inaccurate && sol.dual_infeasibility <= sol.primal_infeasibility {
            sol.dual_objective
        } else {
            dual_bound
        };
        Ok(GuessingCertificate {
            value: raw.clamp(0.0, 1.0),
            primal_value: sol.dual_objective,
            dual_bound,
            bell,
            x_star: self.x_star,
            eps,
            level: ms.level,
            status: sol.status,
            iterations: sol.iterations,
        })
    }
}

pub fn guessing_probability(b: &Behavior, x_star: usize, level: Level) -> Result<GuessingCertificate> {
    GuessingProblem::new(&b.scenario, x_star, level)?.solve(b, 0.0, &Tolerances::default())
}

pub fn guessing_probability_robust(b: &Behavior, x_star: usize, eps: f64, level: Level) -> Result<GuessingCertificate> {
    GuessingProblem::new(&b.scenario, x_star, level)?.solve(b, eps, &Tolerances::default())
}
