use nalgebra::{DMatrix, DVector};

use super::{Sense, SolverStatus, Tolerances};

/// `min/max cᵀx` subject to `Ax = b`, `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub sense: Sense,
    pub c: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: SolverStatus,
    pub x: Vec<f64>,
    /// Equality multipliers: `cᵀx = bᵀy` at optimality for the stated sense.
    pub y: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    t: DMatrix<f64>,
    basis: Vec<usize>,
    rows: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, q: usize) {
        let ncol = self.t.ncols();
        let piv = self.t[(r, q)];
        for j in 0..ncol {
            self.t[(r, j)] /= piv;
        }
        for i in 0..self.t.nrows() {
            if i == r {
                continue;
            }
            let f = self.t[(i, q)];
            if f != 0.0 {
                for j in 0..ncol {
                    let v = self.t[(r, j)];
                    if v != 0.0 {
                        self.t[(i, j)] -= f * v;
                    }
                }
            }
        }
        self.basis[r] = q;
    }

    /// Runs the simplex on objective row `obj` over columns `< ncand`.
    fn run(&mut self, obj: usize, ncand: usize, tol: &Tolerances, pivots: &mut usize) -> SolverStatus {
        let rhs = self.t.ncols() - 1;
        let m = self.basis.len();
        let mut stall = 0usize;
        let limit = 50 * (m + ncand) + 1000;
        loop {
            if *pivots > limit {
                return SolverStatus::IterationLimit;
            }
            let bland = stall > 50;
            let mut q = None;
            let mut best = -tol.pivot;
            for j in 0..ncand {
                let d = self.t[(obj, j)];
                if d < best {
                    q = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = q else { return SolverStatus::Optimal };
            let mut r = None;
            let mut ratio = f64::INFINITY;
            for i in 0..m {
                let a = self.t[(i, q)];
                if a > tol.pivot {
                    let v = self.t[(i, rhs)] / a;
                    let better = match r {
                        None => true,
                        Some(ri) => {
                            v < ratio - 1e-12 || (v <= ratio + 1e-12 && self.basis[i] < self.basis[ri])
                        }
                    };
                    if better {
                        ratio = v;
                        r = Some(i);
                    }
                }
            }
            let Some(r) = r else { return SolverStatus::DualInfeasible };
            stall = if ratio.abs() < 1e-12 { stall + 1 } else { 0 };
            self.pivot(r, q);
            *pivots += 1;
        }
    }
}

/// Two-phase dense tableau simplex with a Bland's-rule fallback on stalling.
pub fn solve_lp(problem: &LpProblem, tol: &Tolerances) -> LpSolution {
    let (m, n) = problem.a.shape();
    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let c: Vec<f64> = problem.c.iter().map(|v| sign * v).collect();
    let fail = |status| LpSolution { status, x: vec![0.0; n], y: vec![0.0; m], objective: f64::NAN, pivots: 0 };
    if c.len() != n || problem.b.len() != m {
        return fail(SolverStatus::NumericalFailure);
    }

    // Columns: n structural, m artificial, rhs. Rows: m constraints, phase-II cost, phase-I cost.
    let mut t = DMatrix::zeros(m + 2, n + m + 1);
    for i in 0..m {
        let s = if problem.b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = s * problem.a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, n + m)] = s * problem.b[i];
    }
    for j in 0..n {
        t[(m, j)] = c[j];
        let col: f64 = (0..m).map(|i| t[(i, j)]).sum();
        t[(m + 1, j)] = -col;
    }
    let sum_b: f64 = (0..m).map(|i| t[(i, n + m)]).sum();
    t[(m + 1, n + m)] = -sum_b;
    let mut tab = Tableau { t, basis: (n..n + m).collect(), rows: (0..m).collect() };
    let mut pivots = 0;

    let st = tab.run(m + 1, n, tol, &mut pivots);
    if st == SolverStatus::IterationLimit {
        return fail(st);
    }
    let scale = 1.0 + problem.b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if -tab.t[(m + 1, n + m)] > tol.feasibility * scale {
        return fail(SolverStatus::PrimalInfeasible);
    }

    // Drive remaining artificials out; rows where that fails are redundant.
    let mut redundant = vec![false; m];
    for r in 0..m {
        if tab.basis[r] >= n {
            let q = (0..n).find(|&j| tab.t[(r, j)].abs() > tol.pivot);
            match q {
                Some(q) => {
                    tab.pivot(r, q);
                    pivots += 1;
                }
                None => redundant[r] = true,
            }
        }
    }
    let keep: Vec<usize> = (0..m).filter(|&r| !redundant[r]).collect();
    if keep.len() < m {
        let ncol = tab.t.ncols();
        let mut t2 = DMatrix::zeros(keep.len() + 2, ncol);
        for (k, &r) in keep.iter().chain([m, m + 1].iter()).enumerate() {
            t2.row_mut(k).copy_from(&tab.t.row(r));
        }
        tab.basis = keep.iter().map(|&r| tab.basis[r]).collect();
        tab.rows = keep.iter().map(|&r| tab.rows[r]).collect();
        tab.t = t2;
    }
    let mk = tab.basis.len();
    let st = tab.run(mk, n, tol, &mut pivots);
    if st != SolverStatus::Optimal {
        return LpSolution { pivots, ..fail(st) };
    }

    if mk == 0 {
        let objective = 0.0;
        return LpSolution { status: SolverStatus::Optimal, x: vec![0.0; n], y: vec![0.0; m], objective, pivots };
    }
    // Recover primal and dual values from the basis for accuracy.
    let bmat = DMatrix::from_fn(mk, mk, |i, k| problem.a[(tab.rows[i], tab.basis[k])]);
    let rhs = DVector::from_fn(mk, |i, _| problem.b[tab.rows[i]]);
    let lu = bmat.clone().lu();
    let mut x = vec![0.0; n];
    let xb = lu.solve(&rhs);
    let cb = DVector::from_fn(mk, |k, _| c[tab.basis[k]]);
    let yb = bmat.transpose().lu().solve(&cb);
    let (Some(xb), Some(yb)) = (xb, yb) else {
        return LpSolution { pivots, ..fail(SolverStatus::NumericalFailure) };
    };
    for k in 0..mk {
        x[tab.basis[k]] = xb[k].max(0.0);
    }
    let mut y = vec![0.0; m];
    for (i, &r) in tab.rows.iter().enumerate() {
        y[r] = sign * yb[i];
    }
    let objective = problem.c.iter().zip(&x).map(|(a, b)| a * b).sum();
    LpSolution { status: SolverStatus::Optimal, x, y, objective, pivots }
}
