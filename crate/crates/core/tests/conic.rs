use diqkd::conic::{
    read_dump, solve_lp, solve_sdp, write_dump, LpProblem, SdpConstraint, SdpProblem, Sense,
    SolverStatus, SparseSym, Tolerances,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lp(sense: Sense, c: &[f64], rows: &[&[f64]], b: &[f64]) -> LpProblem {
    let n = c.len();
    let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    LpProblem { sense, c: c.to_vec(), a, b: b.to_vec() }
}

/// Minimum over all basic feasible solutions.
fn vertex_enumeration(p: &LpProblem) -> Option<f64> {
    let (m, n) = p.a.shape();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let b = DMatrix::from_fn(m, m, |i, k| p.a[(i, idx[k])]);
        if b.determinant().abs() > 1e-9 {
            if let Some(xb) = b.lu().solve(&DVector::from_column_slice(&p.b)) {
                if xb.iter().all(|v| *v >= -1e-9) {
                    let obj: f64 = idx.iter().zip(xb.iter()).map(|(&j, v)| p.c[j] * v).sum();
                    best = Some(best.map_or(obj, |o: f64| o.min(obj)));
                }
            }
        }
        let mut k = m;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < n - m + k {
                idx[k] += 1;
                for l in k + 1..m {
                    idx[l] = idx[l - 1] + 1;
                }
                break;
            }
        }
    }
}

#[test]
fn lp_textbook_maximum() {
    // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 with slacks.
    let p = lp(
        Sense::Maximize,
        &[3.0, 5.0, 0.0, 0.0, 0.0],
        &[&[1.0, 0.0, 1.0, 0.0, 0.0], &[0.0, 2.0, 0.0, 1.0, 0.0], &[3.0, 2.0, 0.0, 0.0, 1.0]],
        &[4.0, 12.0, 18.0],
    );
    let s = solve_lp(&p, &Tolerances::default());
    assert_eq!(s.status, SolverStatus::Optimal);
    assert!((s.objective - 36.0).abs() < 1e-10);
    assert!((s.x[0] - 2.0).abs() < 1e-10 && (s.x[1] - 6.0).abs() < 1e-10);
    let dual: f64 = s.y.iter().zip(&p.b).map(|(a, b)| a * b).sum();
    assert!((dual - 36.0).abs() < 1e-9);
}

#[test]
fn lp_detects_infeasible_and_unbounded() {
    let p = lp(Sense::Minimize, &[1.0, 1.0], &[&[1.0, 1.0], &[1.0, 1.0]], &[1.0, 2.0]);
    assert_eq!(solve_lp(&p, &Tolerances::default()).status, SolverStatus::PrimalInfeasible);
    let p = lp(Sense::Minimize, &[-1.0, 0.0], &[&[1.0, -1.0]], &[1.0]);
    assert_eq!(solve_lp(&p, &Tolerances::default()).status, SolverStatus::DualInfeasible);
}

#[test]
fn lp_redundant_rows() {
    let p = lp(
        Sense::Minimize,
        &[1.0, 2.0, 3.0],
        &[&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0], &[1.0, 0.0, -1.0]],
        &[1.0, 2.0, 0.0],
    );
    let s = solve_lp(&p, &Tolerances::default());
    assert_eq!(s.status, SolverStatus::Optimal);
    assert!((s.objective - 2.0).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn lp_matches_vertex_enumeration(seed in any::<u64>(), m in 1usize..4, extra in 1usize..5) {
        let n = (m + extra).min(8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-2.0..2.0f64).round());
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..m).map(|i| (0..n).map(|j| a[(i, j)] * x0[j]).sum()).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
        let p = LpProblem { sense: Sense::Minimize, c, a, b };
        let s = solve_lp(&p, &Tolerances::default());
        if let Some(oracle) = vertex_enumeration(&p) {
            prop_assert_eq!(s.status, SolverStatus::Optimal);
            prop_assert!((s.objective - oracle).abs() < 1e-7 * (1.0 + oracle.abs()));
        }
    }
}

fn trace_one(n: usize) -> SdpConstraint {
    let mut a = SparseSym::new();
    for i in 0..n {
        a.push(i, i, 1.0);
    }
    SdpConstraint { psd: vec![(0, a)], rhs: 1.0, ..Default::default() }
}

#[test]
fn sdp_diag_example() {
    let mut p = SdpProblem::new(Sense::Maximize, vec![2], 0, 0);
    p.c_psd[0].push(0, 0, 1.0);
    p.c_psd[0].push(1, 1, -1.0);
    p.constraints.push(trace_one(2));
    let s = solve_sdp(&p, &Tolerances::default());
    assert_eq!(s.status, SolverStatus::Optimal);
    assert!((s.primal_objective - 1.0).abs() < 1e-7);
    assert!((s.dual_objective - 1.0).abs() < 1e-7);
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SparseSym {
    let mut c = SparseSym::new();
    for i in 0..n {
        for j in i..n {
            c.push(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    c
}

/// Largest Rayleigh quotient over a grid of unit vectors.
fn rayleigh_grid(c: &DMatrix<f64>) -> f64 {
    let n = c.nrows();
    let steps = 2000;
    let mut best = f64::NEG_INFINITY;
    if n == 2 {
        for k in 0..steps {
            let t = std::f64::consts::PI * k as f64 / steps as f64;
            let v = DVector::from_vec(vec![t.cos(), t.sin()]);
            best = best.max((v.transpose() * c * &v)[0]);
        }
    } else {
        let f = |th: f64, ph: f64| {
            let v = DVector::from_vec(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
            (v.transpose() * c * &v)[0]
        };
        let s = 300;
        let mut arg = (0.0, 0.0);
        for i in 0..=s {
            let th = std::f64::consts::PI * i as f64 / s as f64;
            for j in 0..2 * s {
                let ph = std::f64::consts::PI * j as f64 / s as f64;
                if f(th, ph) > best {
                    best = f(th, ph);
                    arg = (th, ph);
                }
            }
        }
        // Pattern search around the best grid point.
        let mut h = 0.02;
        while h > 1e-9 {
            let mut moved = false;
            for (dt, dp) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
                let v = f(arg.0 + dt, arg.1 + dp);
                if v > best {
                    best = v;
                    arg = (arg.0 + dt, arg.1 + dp);
                    moved = true;
                }
            }
            if !moved {
                h /= 2.0;
            }
        }
    }
    best
}

#[test]
fn sdp_lambda_max_against_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [2usize, 3] {
        for _ in 0..4 {
            let c = random_sym(&mut rng, n);
            let mut p = SdpProblem::new(Sense::Maximize, vec![n], 0, 0);
            p.c_psd[0] = c.clone();
            p.constraints.push(trace_one(n));
            let s = solve_sdp(&p, &Tolerances::default());
            assert_eq!(s.status, SolverStatus::Optimal);
            let oracle = rayleigh_grid(&c.to_dense(n));
            assert!((s.primal_objective - oracle).abs() < 1e-5, "{} vs {}", s.primal_objective, oracle);
        }
    }
}

/// min ⟨C, X⟩ over 3×3 correlation matrices by a grid over the off-diagonals.
fn correlation_grid(c: &DMatrix<f64>) -> f64 {
    let s = 200;
    let mut best = f64::INFINITY;
    let g = |k: usize| -1.0 + 2.0 * k as f64 / s as f64;
    for i in 0..=s {
        for j in 0..=s {
            for k in 0..=s {
                let (a, b, d) = (g(i), g(j), g(k));
                if 1.0 + 2.0 * a * b * d - a * a - b * b - d * d < -1e-12 {
                    continue;
                }
                let v = c[(0, 0)] + c[(1, 1)] + c[(2, 2)] + 2.0 * (c[(0, 1)] * a + c[(0, 2)] * b + c[(1, 2)] * d);
                best = best.min(v);
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn sdp_lambda_max_matches_eigendecomposition(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_sym(&mut rng, n);
        let mut p = SdpProblem::new(Sense::Maximize, vec![n], 0, 0);
        p.c_psd[0] = c.clone();
        p.constraints.push(trace_one(n));
        let s = solve_sdp(&p, &Tolerances::default());
        prop_assert_eq!(s.status, SolverStatus::Optimal);
        prop_assert!(s.gap < 1e-7);
        prop_assert!((s.primal_objective - s.dual_objective).abs() < 1e-6);
        let oracle = c.to_dense(n).symmetric_eigen().eigenvalues.max();
        prop_assert!((s.primal_objective - oracle).abs() < 1e-6, "{} vs {}", s.primal_objective, oracle);
    }
}

#[test]
fn sdp_correlation_matrix_against_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2 {
        let c = random_sym(&mut rng, 3);
        let mut p = SdpProblem::new(Sense::Minimize, vec![3], 0, 0);
        p.c_psd[0] = c.clone();
        for i in 0..3 {
            let mut a = SparseSym::new();
            a.push(i, i, 1.0);
            p.constraints.push(SdpConstraint { psd: vec![(0, a)], rhs: 1.0, ..Default::default() });
        }
        let s = solve_sdp(&p, &Tolerances::default());
        assert_eq!(s.status, SolverStatus::Optimal);
        let oracle = correlation_grid(&c.to_dense(3));
        // Grid spacing 0.01 bounds the oracle error from above.
        assert!(s.primal_objective <= oracle + 1e-6);
        assert!(oracle - s.primal_objective < 0.05, "{} vs {}", s.primal_objective, oracle);
    }
}

#[test]
fn sdp_with_lp_and_free_blocks() {
    // min x0 + 2 x1 + u  s.t. X00 + x0 = 1, X11 + x1 − u = 0, u − X01 = 0.5 ...
    // reduced to a check of primal-dual agreement and feasibility.
    let mut p = SdpProblem::new(Sense::Minimize, vec![2], 2, 1);
    p.c_psd[0].push(0, 0, 1.0);
    p.c_psd[0].push(1, 1, 1.0);
    p.c_lp = vec![1.0, 2.0];
    p.c_free = vec![0.5];
    let mut a = SparseSym::new();
    a.push(0, 1, 0.5);
    p.constraints.push(SdpConstraint { psd: vec![(0, a)], lp: vec![(0, 1.0)], free: vec![(0, 1.0)], rhs: 1.0 });
    let mut a = SparseSym::new();
    a.push(0, 0, 1.0);
    p.constraints.push(SdpConstraint { psd: vec![(0, a)], lp: vec![(1, 1.0)], free: vec![], rhs: 2.0 });
    let s = solve_sdp(&p, &Tolerances::default());
    assert_eq!(s.status, SolverStatus::Optimal, "{s:?}");
    assert!(s.gap < 1e-7);
    assert!(s.primal_infeasibility < 1e-7);
    assert!(s.x_lp.iter().all(|v| *v >= -1e-9));
}

#[test]
fn sdp_infeasible_reported() {
    // X ⪰ 0 with X00 = −1.
    let mut p = SdpProblem::new(Sense::Minimize, vec![2], 0, 0);
    let mut a = SparseSym::new();
    a.push(0, 0, 1.0);
    p.constraints.push(SdpConstraint { psd: vec![(0, a)], rhs: -1.0, ..Default::default() });
    let s = solve_sdp(&p, &Tolerances::default());
    assert_eq!(s.status, SolverStatus::PrimalInfeasible);
}

#[test]
fn sdp_unbounded_reported() {
    // min −X00 with X11 = 1 has no lower bound.
    let mut p = SdpProblem::new(Sense::Minimize, vec![2], 0, 0);
    p.c_psd[0].push(0, 0, -1.0);
    let mut a = SparseSym::new();
    a.push(1, 1, 1.0);
    p.constraints.push(SdpConstraint { psd: vec![(0, a)], rhs: 1.0, ..Default::default() });
    let s = solve_sdp(&p, &Tolerances::default());
    assert_eq!(s.status, SolverStatus::DualInfeasible);
}

#[test]
fn dump_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut p = SdpProblem::new(Sense::Maximize, vec![3, 2], 1, 1);
    p.c_psd[0] = random_sym(&mut rng, 3);
    p.c_free[0] = 0.25;
    p.constraints.push(trace_one(3));
    p.constraints.push(SdpConstraint { lp: vec![(0, 1.0)], free: vec![(0, -1.0)], rhs: 0.5, ..Default::default() });
    let text = write_dump(&p);
    let q = read_dump(&text).unwrap();
    assert_eq!(write_dump(&q), text);
    let a = solve_sdp(&p, &Tolerances::default());
    let b = solve_sdp(&q, &Tolerances::default());
    assert_eq!(a.primal_objective.to_bits(), b.primal_objective.to_bits());
}
