use std::f64::consts::PI;
use std::sync::Mutex;

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, nonlocality, test_settings, KeyRateReport, OptimizerTrace, StartRecord, NU_REP};
use crate::behavior::conditional_entropy;
use crate::certify::{BellFunctional, Level};
use crate::error::{Error, Result};
use crate::schemes::{behavior, MeasurementSetting, SchemeConfig, SchemeKind};

const T_CH: (f64, f64) = (1e-5, 0.5);
const REFLECT_SH: (f64, f64) = (1e-7, 0.5);
const PBAR: (f64, f64) = (1e-6, 0.05);
const NONLOCAL_TOL: f64 = 1e-7;
const PENALTY: f64 = 1e30;
const GUIDE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// ν · P(herald) · r_down.
    KeyRate,
    /// r_down per heralded round.
    Rate,
    /// Signed white-noise weight of the test behavior.
    Nonlocality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Diqkd,
    Nonlocality,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    pub starts: usize,
    /// Objective evaluations per start.
    pub evals: usize,
    pub tol: f64,
    /// Bell-functional refreshes per start.
    pub rounds: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { starts: 20, evals: 2000, tol: 1e-6, rounds: 4, seed: 0, workers: 1 }
    }
}

/// Parameters held fixed during a search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    pub scheme: SchemeKind,
    pub eta_l: f64,
    pub eta_t: f64,
    pub p: f64,
    pub pbar: f64,
    pub free_pbar: bool,
}

impl FixedParams {
    pub fn new(scheme: SchemeKind, eta_l: f64, eta_t: f64) -> Self {
        FixedParams { scheme, eta_l, eta_t, p: 1e-4, pbar: 1e-4, free_pbar: false }
    }
}

/// Free-parameter layout and objective of one optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Search {
    pub fixed: FixedParams,
    pub objective: Objective,
    pub level: Level,
    pub nu_rep: f64,
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn log_box(u: f64, (lo, hi): (f64, f64)) -> f64 {
    lo * (hi / lo).powf(sigmoid(u))
}

fn log_box_inv(v: f64, (lo, hi): (f64, f64)) -> f64 {
    let s = ((v.ln() - lo.ln()) / (hi.ln() - lo.ln())).clamp(1e-9, 1.0 - 1e-9);
    (s / (1.0 - s)).ln()
}

impl Search {
    pub fn new(fixed: FixedParams, objective: Objective) -> Self {
        Search { fixed, objective, level: Level::OnePlusAB, nu_rep: NU_REP }
    }

    fn free_pbar(&self) -> bool {
        self.fixed.free_pbar && self.fixed.scheme == SchemeKind::Sh
    }

    fn n_bob(&self) -> usize {
        if self.objective == Objective::Nonlocality {
            2
        } else {
            3
        }
    }

    fn n_scalar(&self) -> usize {
        2 + usize::from(self.free_pbar())
    }

    pub fn dim(&self) -> usize {
        self.n_scalar() + 2 * (2 + self.n_bob())
    }

    /// Layout: T, t, [p̄], then (φ, θ) for Alice's settings followed by Bob's.
    pub fn decode(&self, x: &[f64]) -> SchemeConfig {
        let f = &self.fixed;
        let base = match f.scheme {
            SchemeKind::Sh => SchemeConfig::sh_default(),
            SchemeKind::Ch => SchemeConfig::ch_default(),
        };
        let transmittance = match f.scheme {
            SchemeKind::Ch => log_box(x[0], T_CH),
            SchemeKind::Sh => 1.0 - log_box(x[0], REFLECT_SH),
        };
        let pbar = match (f.scheme, self.free_pbar()) {
            (SchemeKind::Ch, _) => 0.0,
            (SchemeKind::Sh, true) => log_box(x[2], PBAR),
            (SchemeKind::Sh, false) => f.pbar,
        };
        let k = self.n_scalar();
        let angle = |i: usize| MeasurementSetting::new(x[k + 2 * i], x[k + 2 * i + 1]);
        let nb = self.n_bob();
        SchemeConfig {
            p: f.p,
            pbar,
            transmittance,
            t: x[1].sin().powi(2),
            eta_t: f.eta_t,
            settings_a: (0..2).map(angle).collect(),
            settings_b: (2..2 + nb).map(angle).collect(),
            key_pair: if nb == 3 { (0, 2) } else { (0, 0) },
            ..base
        }
        .with_local_efficiency(f.eta_l)
    }

    /// Inverse of [`Search::decode`] up to angle periodicity.
    pub fn encode(&self, cfg: &SchemeConfig) -> Vec<f64> {
        let mut x = vec![
            match self.fixed.scheme {
                SchemeKind::Ch => log_box_inv(cfg.transmittance, T_CH),
                SchemeKind::Sh => log_box_inv(1.0 - cfg.transmittance, REFLECT_SH),
            },
            cfg.t.clamp(0.0, 1.0).sqrt().asin(),
        ];
        if self.free_pbar() {
            x.push(log_box_inv(cfg.pbar.max(PBAR.0), PBAR));
        }
        let nb = self.n_bob();
        let bob = cfg.settings_b.iter().chain(std::iter::repeat(&cfg.settings_b[0]));
        for s in cfg.settings_a.iter().take(2).chain(bob.take(nb)) {
            x.push(s.phi);
            x.push(s.theta);
        }
        x
    }

    /// Linear CHSH analyzers plus a key setting aligned with Alice's first.
    pub fn canonical(&self) -> Vec<f64> {
        let (a, mut b) = SchemeConfig::default_settings();
        b.truncate(self.n_bob());
        if self.n_bob() == 3 {
            b.push(MeasurementSetting::linear(0.0));
        }
        let base = match self.fixed.scheme {
            SchemeKind::Sh => SchemeConfig::sh_default(),
            SchemeKind::Ch => SchemeConfig::ch_default(),
        };
        let t = if self.objective == Objective::Nonlocality { 0.2 } else { 0.02 };
        let cfg = SchemeConfig { settings_a: a, settings_b: b, t, pbar: self.fixed.pbar.max(PBAR.0), ..base };
        self.encode(&cfg)
    }

    fn steps(&self) -> Vec<f64> {
        let k = self.n_scalar();
        (0..self.dim()).map(|i| if i < k { 0.4 } else { 0.15 }).collect()
    }

    fn perturbed(&self, x0: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let k = self.n_scalar();
        x0.iter()
            .enumerate()
            .map(|(i, &v)| {
                let w = if i < k { 1.5 } else { PI / 6.0 };
                v + rng.gen_range(-w..w)
            })
            .collect()
    }

    /// Exact objective at `x` (ε = 0) and the Bell functional behind it.
    fn exact(&self, x: &[f64]) -> Result<(f64, Option<BellFunctional>)> {
        let cfg = self.decode(x);
        match self.objective {
            Objective::Nonlocality => {
                let n = nonlocality(&cfg)?;
                // Inside the local set w* is flat at zero; the CHSH deficit gives a slope.
                let v = if n.w > NONLOCAL_TOL { n.w } else { GUIDE * (n.chsh - 2.0).min(0.0) };
                Ok((v, None))
            }
            Objective::Rate | Objective::KeyRate => {
                let (rep, cert) = evaluate(&cfg, self.level, Some(0.0), self.nu_rep)?;
                let v = if self.objective == Objective::Rate { rep.r_down } else { rep.k_raw };
                Ok((v, Some(cert.bell)))
            }
        }
    }

    /// Lower bound on the objective using a fixed Bell functional for G.
    fn surrogate(&self, x: &[f64], bell: &BellFunctional) -> Result<f64> {
        let cfg = self.decode(x);
        let res = behavior(&cfg)?;
        let (xs, ys) = test_settings(&cfg);
        let test = res.behavior.restrict(&xs, &ys)?;
        let g = bell.evaluate(&test).clamp(1e-12, 1.0);
        let r = -g.log2() - conditional_entropy(&res.behavior, cfg.key_pair.0, cfg.key_pair.1)?;
        Ok(match self.objective {
            Objective::KeyRate => self.nu_rep * res.p_herald * r,
            _ => r,
        })
    }
}

struct Tracked<'a, F: Fn(&[f64]) -> Result<f64>> {
    f: F,
    scale: f64,
    limit: usize,
    state: &'a Mutex<(usize, f64, Vec<f64>)>,
}

impl<F: Fn(&[f64]) -> Result<f64>> CostFunction for Tracked<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let mut st = self.state.lock().expect("tracker poisoned");
        if st.0 >= self.limit {
            return Err(argmin::core::Error::msg("evaluation budget exhausted"));
        }
        st.0 += 1;
        drop(st);
        let v = (self.f)(x).unwrap_or(f64::NEG_INFINITY);
        let mut st = self.state.lock().expect("tracker poisoned");
        if v > st.1 {
            st.1 = v;
            st.2 = x.clone();
        }
        Ok(if v.is_finite() { -v / self.scale } else { PENALTY })
    }
}

/// Nelder–Mead maximization of `f` from `x0`; returns (best value, point, evaluations, exhausted).
fn simplex_max(
    f: impl Fn(&[f64]) -> Result<f64>,
    x0: &[f64],
    steps: &[f64],
    scale: f64,
    limit: usize,
    tol: f64,
) -> (f64, Vec<f64>, usize, bool) {
    let state = Mutex::new((0usize, f64::NEG_INFINITY, x0.to_vec()));
    let mut simplex = vec![x0.to_vec()];
    for (i, s) in steps.iter().enumerate() {
        let mut v = x0.to_vec();
        v[i] += s;
        simplex.push(v);
    }
    let exhausted = match NelderMead::new(simplex).with_sd_tolerance(tol) {
        Ok(solver) => {
            let cost = Tracked { f, scale: scale.max(f64::MIN_POSITIVE), limit, state: &state };
            Executor::new(cost, solver).configure(|s| s.max_iters(limit as u64)).run().is_err()
        }
        Err(_) => true,
    };
    let (n, best, x) = state.into_inner().expect("tracker poisoned");
    (best, x, n, exhausted)
}

impl Search {
    fn run_start(&self, start: usize, x0: Vec<f64>, budget: &Budget) -> Result<StartRecord> {
        let steps = self.steps();
        if self.objective == Objective::Nonlocality {
            let (v, x, n, ex) = simplex_max(|x| Ok(self.exact(x)?.0), &x0, &steps, 1.0, budget.evals, budget.tol);
            return Ok(StartRecord {
                start,
                value: v,
                evaluations: n,
                sdp_solves: 0,
                rounds: 1,
                budget_exhausted: ex,
                point: x,
            });
        }
        let (mut value, bell) = self.exact(&x0)?;
        let mut bell = bell.ok_or_else(|| Error::Invalid("missing Bell functional".into()))?;
        let mut point = x0;
        let mut rec = StartRecord {
            start,
            value,
            evaluations: 1,
            sdp_solves: 1,
            rounds: 0,
            budget_exhausted: false,
            point: point.clone(),
        };
        let per_round = (budget.evals / budget.rounds.max(1)).max(1);
        for round in 0..budget.rounds {
            let shrink = 0.5f64.powi(round as i32);
            let st: Vec<f64> = steps.iter().map(|s| s * shrink).collect();
            let scale = value.abs().max(1e-3);
            let (sv, x, n, ex) = simplex_max(|x| self.surrogate(x, &bell), &point, &st, scale, per_round, budget.tol);
            rec.evaluations += n;
            rec.rounds += 1;
            rec.budget_exhausted |= ex;
            if !(sv > value + budget.tol * scale) {
                break;
            }
            let Ok((v, b)) = self.exact(&x) else { break };
            rec.evaluations += 1;
            rec.sdp_solves += 1;
            if !(v > value) {
                break;
            }
            value = v;
            point = x;
            bell = b.expect("rate objectives carry a functional");
        }
        rec.value = value;
        rec.point = point;
        Ok(rec)
    }
}

/// Best point found by the multi-start search; values are at ε = 0.
pub fn maximize(search: &Search, budget: &Budget, initial: Option<Vec<f64>>) -> Result<(SchemeConfig, OptimizerTrace)> {
    if budget.starts == 0 {
        return Err(Error::Invalid("budget needs at least one start".into()));
    }
    let x0 = initial.unwrap_or_else(|| search.canonical());
    if x0.len() != search.dim() {
        return Err(Error::Invalid(format!("initial point has {} entries, expected {}", x0.len(), search.dim())));
    }
    let starts: Vec<Vec<f64>> = (0..budget.starts)
        .map(|i| {
            if i == 0 {
                x0.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(budget.seed.wrapping_add(i as u64));
                search.perturbed(&x0, &mut rng)
            }
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(budget.workers.max(1))
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let records: Vec<StartRecord> = pool.install(|| {
        starts.into_par_iter().enumerate().filter_map(|(i, x)| search.run_start(i, x, budget).ok()).collect()
    });
    let best = records
        .iter()
        .filter(|r| r.value.is_finite())
        .fold(None::<&StartRecord>, |acc, r| match acc {
            Some(b) if b.value >= r.value => Some(b),
            _ => Some(r),
        })
        .ok_or_else(|| Error::Invalid("no start produced a finite objective".into()))?;
    let trace = OptimizerTrace {
        evaluations: records.iter().map(|r| r.evaluations).sum(),
        best_point: best.point.clone(),
        best_value: best.value,
        seed: budget.seed,
        budget_exhausted: records.iter().any(|r| r.budget_exhausted),
        starts: records.clone(),
    };
    Ok((search.decode(&best.point), trace))
}

/// Maximizes the key rate (or r_down) and reports it with ε recomputed at the optimum.
pub fn maximize_key(search: &Search, budget: &Budget, initial: Option<Vec<f64>>) -> Result<KeyRateReport> {
    if search.objective == Objective::Nonlocality {
        return Err(Error::Invalid("maximize_key needs a rate objective".into()));
    }
    let (cfg, trace) = maximize(search, budget, initial)?;
    let (mut report, _) = evaluate(&cfg, search.level, None, search.nu_rep)?;
    report.trace = trace;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalEfficiency {
    pub scheme: SchemeKind,
    pub criterion: Criterion,
    pub eta: f64,
    pub bracket: (f64, f64),
    /// (η_l, objective value) at every probe.
    pub probes: Vec<(f64, f64)>,
}

/// Smallest η_l meeting the criterion: a descending scan in steps of `step`,
/// each warm-started from the last success, then bisection inside the final step.
pub fn critical_local_efficiency(
    scheme: SchemeKind,
    criterion: Criterion,
    bracket: (f64, f64),
    step: f64,
    resolution: f64,
    level: Level,
    budget: &Budget,
) -> Result<CriticalEfficiency> {
    let (lo0, hi0) = bracket;
    if !(lo0 < hi0) || !(step > 0.0) || !(resolution > 0.0) {
        return Err(Error::Invalid("bad bracket or step".into()));
    }
    let objective = match criterion {
        Criterion::Diqkd => Objective::Rate,
        Criterion::Nonlocality => Objective::Nonlocality,
    };
    let mut probes = Vec::new();
    let mut probe = |eta: f64, warm: &Option<Vec<f64>>| -> Result<(bool, Vec<f64>)> {
        let mut search = Search::new(FixedParams::new(scheme, eta, 1.0), objective);
        search.level = level;
        let (v, point) = match criterion {
            Criterion::Diqkd => {
                let rep = maximize_key(&search, budget, warm.clone())?;
                (rep.r_down, rep.trace.best_point)
            }
            Criterion::Nonlocality => {
                let (_, trace) = maximize(&search, budget, warm.clone())?;
                (trace.best_value, trace.best_point)
            }
        };
        probes.push((eta, v));
        Ok((v > if criterion == Criterion::Nonlocality { NONLOCAL_TOL } else { 0.0 }, point))
    };
    let (ok, mut warm) = probe(hi0, &None)?;
    if !ok {
        return Err(Error::Invalid(format!("criterion not met at upper bracket η_l = {hi0}")));
    }
    let mut hi = hi0;
    let mut lo = loop {
        let eta = (hi - step).max(lo0);
        let (ok, point) = probe(eta, &Some(warm.clone()))?;
        if !ok {
            break eta;
        }
        if eta <= lo0 {
            return Err(Error::Invalid(format!("criterion already met at lower bracket η_l = {lo0}")));
        }
        hi = eta;
        warm = point;
    };
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        let (ok, point) = probe(mid, &Some(warm.clone()))?;
        if ok {
            hi = mid;
            warm = point;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalEfficiency { scheme, criterion, eta: hi, bracket, probes })
}
