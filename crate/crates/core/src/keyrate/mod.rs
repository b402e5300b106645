//! Key-rate bounds, parameter optimization, threshold searches and distance sweeps.

#[cfg(feature = "optimize")]
mod optimize;
#[cfg(feature = "optimize")]
mod sweep;

use serde::{Deserialize, Serialize};

use crate::behavior::{chi, conditional_entropy, Behavior, Binning};
use crate::certify::{epsilon_upper, local_analysis, GuessingCertificate, GuessingProblem, Level};
use crate::conic::Tolerances;
use crate::error::{Error, Result};
use crate::schemes::{behavior, SchemeConfig};

#[cfg(feature = "optimize")]
pub use optimize::{
    critical_local_efficiency, maximize, maximize_key, Budget, CriticalEfficiency, Criterion, FixedParams,
    Objective, Search,
};
#[cfg(feature = "optimize")]
pub use sweep::{distance_sweep, sweep_to_csv, SweepRow};

/// Attenuation length of telecom fiber, km.
pub const L_ATT_KM: f64 = 22.0;
/// Default source repetition rate, Hz.
pub const NU_REP: f64 = 100e6;

pub fn transmission(l_km: f64) -> f64 {
    (-l_km / L_ATT_KM).exp()
}

/// −log₂ G(x*) − H(x*|y*) on the full behavior.
pub fn r_down(b: &Behavior, x_star: usize, y_star: usize, level: Level, eps: f64) -> Result<f64> {
    let g = GuessingProblem::new(&b.scenario, x_star, level)?.solve(b, eps, &Tolerances::default())?;
    Ok(-g.value.log2() - conditional_entropy(b, x_star, y_star)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshRate {
    pub value: f64,
    pub clamped: bool,
}

/// 1 − χ(S).
pub fn chsh_rate_chain(s: f64) -> ChshRate {
    let hi = 2.0 * std::f64::consts::SQRT_2;
    ChshRate { value: 1.0 - chi(s), clamped: !(2.0..=hi).contains(&s) }
}

/// ν · P(herald) · max(r, 0).
pub fn key_per_second(nu_rep: f64, p_herald: f64, r: f64) -> Result<f64> {
    if !(nu_rep >= 0.0) {
        return Err(Error::OutOfRange { name: "nu_rep", value: nu_rep });
    }
    if !(0.0..=1.0).contains(&p_herald) {
        return Err(Error::OutOfRange { name: "p_herald", value: p_herald });
    }
    Ok(nu_rep * p_herald * r.max(0.0))
}

/// Bob's settings entering the Bell test: all but the key setting once he has three or more.
pub fn test_settings(cfg: &SchemeConfig) -> (Vec<usize>, Vec<usize>) {
    let xs = (0..cfg.settings_a.len()).collect();
    let mb = cfg.settings_b.len();
    let ys = if mb >= 3 { (0..mb).filter(|&y| y != cfg.key_pair.1).collect() } else { (0..mb).collect() };
    (xs, ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub start: usize,
    pub value: f64,
    pub evaluations: usize,
    pub sdp_solves: usize,
    pub rounds: usize,
    pub budget_exhausted: bool,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub evaluations: usize,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub seed: u64,
    pub budget_exhausted: bool,
    pub starts: Vec<StartRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeyRateReport {
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub r_down: f64,
    pub p_herald: f64,
    pub nu_rep: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// ν · P(herald) · r_down without the clamp at zero.
    pub k_raw: f64,
    pub eps: f64,
    pub level: Level,
    pub config: SchemeConfig,
    pub trace: OptimizerTrace,
}

/// Full pipeline at one configuration: behavior, robust guessing bound on the
/// test sub-behavior, entropy at the key pair.
pub fn evaluate(cfg: &SchemeConfig, level: Level, eps: Option<f64>, nu_rep: f64) -> Result<(KeyRateReport, GuessingCertificate)> {
    let res = behavior(cfg)?;
    let eps = match eps {
        Some(e) => e,
        None => epsilon_upper(cfg, cfg.truncation)?,
    };
    let (xs, ys) = test_settings(cfg);
    let test = res.behavior.restrict(&xs, &ys)?;
    let (x_star, y_star) = cfg.key_pair;
    let cert = GuessingProblem::new(&test.scenario, x_star, level)?.solve(&test, eps, &Tolerances::default())?;
    let h = conditional_entropy(&res.behavior, x_star, y_star)?;
    let r = -cert.value.log2() - h;
    let report = KeyRateReport {
        g: cert.value,
        h,
        r_down: r,
        p_herald: res.p_herald,
        nu_rep,
        k: key_per_second(nu_rep, res.p_herald, r)?,
        k_raw: nu_rep * res.p_herald * r,
        eps,
        level,
        config: cfg.clone(),
        trace: OptimizerTrace::default(),
    };
    Ok((report, cert))
}

/// Click patterns binned to ±1 with only a lone V click counting as −1.
pub fn click_binning() -> Binning {
    let v = vec![1.0, -1.0, 1.0, 1.0];
    Binning { a: v.clone(), b: v }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlocality {
    /// Signed white-noise weight; positive means nonlocal.
    pub w: f64,
    /// CHSH value under [`click_binning`].
    pub chsh: f64,
    pub p_herald: f64,
}

/// White-noise LP on the test sub-behavior.
pub fn nonlocality(cfg: &SchemeConfig) -> Result<Nonlocality> {
    let res = behavior(cfg)?;
    let (xs, ys) = test_settings(cfg);
    let test = res.behavior.restrict(&xs, &ys)?;
    Ok(Nonlocality {
        w: local_analysis(&test, &Tolerances::default())?.signed_w,
        chsh: test.chsh(&click_binning())?,
        p_herald: res.p_herald,
    })
}
