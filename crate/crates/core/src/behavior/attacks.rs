use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use super::{chi, conditional_entropy, Behavior, Scenario};
use crate::error::{Error, Result};

/// Maximal CHSH behavior of the singlet.
pub fn tsirelson() -> Behavior {
    Behavior::from_fn(Scenario::new(2, 2, 2, 2), |a, b, x, y| {
        let sign = if (a ^ b ^ (x & y)) == 0 { 1.0 } else { -1.0 };
        (1.0 + sign * FRAC_1_SQRT_2) / 4.0
    })
    .expect("normalized by construction")
}

fn s_t() -> (f64, f64) {
    let c = (std::f64::consts::PI / 4.0).cos();
    ((1.0 + c) / 4.0, (1.0 - c) / 4.0)
}

/// Tsirelson behavior with Alice's detector of efficiency η; Alice's
/// outcome 2 is the no-click event.
pub fn lossy_tsirelson_one_sided(eta: f64) -> Result<Behavior> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange { name: "eta", value: eta });
    }
    let (s, t) = s_t();
    let mut sc = Scenario::new(2, 2, 3, 2);
    sc.phi_a = Some(2);
    Behavior::from_fn(sc, |a, b, x, y| {
        if a == 2 {
            return (1.0 - eta) / 2.0;
        }
        let same = (a == b) ^ (x == 1 && y == 1);
        eta * if same { s } else { t }
    })
}

/// Eve's rule for Alice's conclusive outcome in one attack component.
#[derive(Debug, Clone, PartialEq)]
pub enum GuessRule {
    /// Guess per Alice setting; `None` where the component is silent.
    Deterministic(Vec<Option<usize>>),
    /// Local component: Eve holds the hidden variable.
    LocalModel,
}

#[derive(Debug, Clone)]
pub struct AttackComponent {
    pub weight: f64,
    pub behavior: Behavior,
    pub guess: GuessRule,
}

#[derive(Debug, Clone)]
pub struct AttackDecomposition {
    pub components: Vec<AttackComponent>,
}

impl AttackDecomposition {
    pub fn mixture(&self) -> Result<Behavior> {
        let first = &self.components.first().ok_or_else(|| Error::Invalid("empty attack".into()))?.behavior;
        let mut probs = vec![0.0; first.probs.len()];
        for c in &self.components {
            for (p, q) in probs.iter_mut().zip(&c.behavior.probs) {
                *p += c.weight * q;
            }
        }
        Behavior::new(first.scenario, probs)
    }
}

/// The three-component attack reproducing `lossy_tsirelson_one_sided` at
/// η = (11 + √2)/17 while Eve always knows Alice's conclusive x = 0 outcome.
pub fn appendix_c_attack() -> (f64, AttackDecomposition) {
    let (s, t) = s_t();
    let p = SQRT_2 - 1.0;
    let lambda = (5.0 + 2.0 * SQRT_2) / 17.0;
    let eta = (11.0 + SQRT_2) / 17.0;
    let mut sc = Scenario::new(2, 2, 3, 2);
    sc.phi_a = Some(2);
    let corr = |a: usize, b: usize, anti: bool| if (a == b) ^ anti { s } else { t };
    let p1 = Behavior::from_fn(sc, |a, b, x, y| match (x, a) {
        (0, 2) => 0.0,
        (0, _) => corr(a, b, false),
        (_, 2) => (1.0 - p) / 2.0,
        _ => p * corr(a, b, y == 1),
    });
    let p23 = |keep: usize| {
        Behavior::from_fn(sc, move |a, b, x, y| match (x, a) {
            (0, 2) => {
                if keep == 0 {
                    corr(1, b, false)
                } else {
                    corr(0, b, false)
                }
            }
            (0, _) if a == keep => corr(a, b, false),
            (0, _) => 0.0,
            (_, 2) => 0.0,
            _ => corr(a, b, y == 1),
        })
    };
    let comps = vec![
        AttackComponent { weight: lambda, behavior: p1.expect("valid"), guess: GuessRule::LocalModel },
        AttackComponent {
            weight: (1.0 - lambda) / 2.0,
            behavior: p23(0).expect("valid"),
            guess: GuessRule::Deterministic(vec![Some(0), None]),
        },
        AttackComponent {
            weight: (1.0 - lambda) / 2.0,
            behavior: p23(1).expect("valid"),
            guess: GuessRule::Deterministic(vec![Some(1), None]),
        },
    ];
    (eta, AttackDecomposition { components: comps })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsBound {
    pub value: f64,
    /// Set when the rescaled CHSH value fell outside `[2, 2√2]`.
    pub clamped: bool,
}

/// `(1 − μ) χ((S − 4μ)/(1 − μ)) + μ`.
pub fn gps_bound(s_cc: f64, mu: f64) -> Result<GpsBound> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::OutOfRange { name: "mu", value: mu });
    }
    let arg = (s_cc - 4.0 * mu) / (1.0 - mu);
    let clamped = !(2.0..=2.0 * SQRT_2).contains(&arg);
    Ok(GpsBound { value: (1.0 - mu) * chi(arg) + mu, clamped })
}

/// Detection efficiency below which the combined attack fakes every
/// statistic: `1/(n_k + 1)` when `n_k < m`, otherwise `1/m`.
pub fn eta_c(n_k: u32, m: u32) -> Result<f64> {
    if n_k == 0 || m == 0 {
        return Err(Error::Invalid("n_k and m must be positive".into()));
    }
    Ok(if n_k < m { 1.0 / (n_k + 1) as f64 } else { 1.0 / m as f64 })
}

/// Eve's uncertainty under the combined attack, `(η − η_c)/(1 − η_c)` above η_c.
pub fn combined_attack_hae(eta: f64, n_k: u32, m: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange { name: "eta", value: eta });
    }
    let ec = eta_c(n_k, m)?;
    if ec >= 1.0 {
        return Ok(if eta >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok(((eta - ec) / (1.0 - ec)).max(0.0))
}

/// Perfectly correlated uniform bit seen through symmetric detectors of efficiency η.
pub fn lossy_perfect_correlation(eta: f64) -> Result<Behavior> {
    let bit = Behavior::from_fn(Scenario::new(1, 1, 2, 2), |a, b, _, _| if a == b { 0.5 } else { 0.0 })?;
    bit.apply_local_loss(eta, eta)
}

/// Efficiency at which the combined-attack entropy meets Bob's residual
/// uncertainty on a perfectly correlated bit.
pub fn critical_eta_star(n_k: u32, m: u32) -> Result<f64> {
    let f = |eta: f64| -> Result<f64> {
        let b = lossy_perfect_correlation(eta)?;
        Ok(combined_attack_hae(eta, n_k, m)? - conditional_entropy(&b, 0, 0)?)
    };
    let (mut lo, mut hi) = (eta_c(n_k, m)?, 1.0);
    if f(lo)? >= 0.0 {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
