//! Linear and semidefinite programming back-ends.

mod dump;
mod lp;
mod sdp;

use serde::{Deserialize, Serialize};

pub use dump::{read_dump, write_dump};
pub use lp::{solve_lp, LpProblem, LpSolution};
pub use sdp::{solve_sdp, SdpConstraint, SdpProblem, SdpSolution, SparseSym};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
    /// Small gap with only one side feasible to tolerance.
    Inaccurate,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// All numerical knobs of both back-ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub feasibility: f64,
    pub gap: f64,
    pub max_iterations: usize,
    pub regularization: f64,
    pub step_fraction: f64,
    pub pivot: f64,
    pub divergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-8,
            gap: 1e-8,
            max_iterations: 200,
            regularization: 1e-12,
            step_fraction: 0.95,
            pivot: 1e-9,
            divergence: 1e10,
        }
    }
}
