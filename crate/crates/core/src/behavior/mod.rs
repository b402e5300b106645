//! Bell-scenario behaviors and the entropic quantities built on them.

mod attacks;
mod entropy;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use attacks::{
    appendix_c_attack, combined_attack_hae, critical_eta_star, eta_c, gps_bound, lossy_perfect_correlation,
    lossy_tsirelson_one_sided, tsirelson, AttackComponent, AttackDecomposition, GpsBound, GuessRule,
};
pub use entropy::{binary_entropy, chi, conditional_entropy, shannon};

const NORM_TOL: f64 = 1e-9;
const NEG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub ma: usize,
    pub mb: usize,
    pub oa: usize,
    pub ob: usize,
    #[serde(rename = "phi_index_a")]
    pub phi_a: Option<usize>,
    #[serde(rename = "phi_index_b")]
    pub phi_b: Option<usize>,
}

impl Scenario {
    pub fn new(ma: usize, mb: usize, oa: usize, ob: usize) -> Self {
        Scenario { ma, mb, oa, ob, phi_a: None, phi_b: None }
    }

    pub fn len(&self) -> usize {
        self.ma * self.mb * self.oa * self.ob
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        ((x * self.mb + y) * self.oa + a) * self.ob + b
    }
}

/// Conditional distribution P(a, b | x, y), stored row-major over (x, y, a, b).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Behavior {
    pub scenario: Scenario,
    pub probs: Vec<f64>,
}

/// Outcome-to-±1 assignment used for correlators.
#[derive(Debug, Clone, PartialEq)]
pub struct Binning {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Binning {
    pub fn binary() -> Self {
        Binning { a: vec![1.0, -1.0], b: vec![1.0, -1.0] }
    }
}

impl Behavior {
    pub fn new(scenario: Scenario, probs: Vec<f64>) -> Result<Self> {
        let b = Behavior { scenario, probs };
        b.validate()?;
        Ok(b)
    }

    pub fn from_fn(scenario: Scenario, f: impl Fn(usize, usize, usize, usize) -> f64) -> Result<Self> {
        let mut probs = vec![0.0; scenario.len()];
        for x in 0..scenario.ma {
            for y in 0..scenario.mb {
                for a in 0..scenario.oa {
                    for b in 0..scenario.ob {
                        probs[scenario.index(a, b, x, y)] = f(a, b, x, y);
                    }
                }
            }
        }
        Self::new(scenario, probs)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        if s.ma == 0 || s.mb == 0 || s.oa == 0 || s.ob == 0 {
            return Err(Error::Invalid("empty scenario".into()));
        }
        if self.probs.len() != s.len() {
            return Err(Error::Invalid(format!("expected {} probabilities, got {}", s.len(), self.probs.len())));
        }
        if s.phi_a.is_some_and(|i| i >= s.oa) || s.phi_b.is_some_and(|i| i >= s.ob) {
            return Err(Error::Invalid("no-click index out of range".into()));
        }
        for x in 0..s.ma {
            for y in 0..s.mb {
                let mut sum = 0.0;
                for a in 0..s.oa {
                    for b in 0..s.ob {
                        let p = self.p(a, b, x, y);
                        if !p.is_finite() || p < -NEG_TOL {
                            return Err(Error::Invalid(format!("bad probability {p} at ({a},{b}|{x},{y})")));
                        }
                        sum += p;
                    }
                }
                if (sum - 1.0).abs() > NORM_TOL {
                    return Err(Error::NotNormalized { x, y, sum });
                }
            }
        }
        Ok(())
    }

    pub fn p(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.probs[self.scenario.index(a, b, x, y)]
    }

    pub fn marginal_a(&self, a: usize, x: usize, y: usize) -> f64 {
        (0..self.scenario.ob).map(|b| self.p(a, b, x, y)).sum()
    }

    pub fn marginal_b(&self, b: usize, x: usize, y: usize) -> f64 {
        (0..self.scenario.oa).map(|a| self.p(a, b, x, y)).sum()
    }

    /// Largest violation of the no-signaling conditions.
    pub fn signaling(&self) -> f64 {
        let s = &self.scenario;
        let mut worst = 0.0f64;
        for x in 0..s.ma {
            for a in 0..s.oa {
                let m0 = self.marginal_a(a, x, 0);
                for y in 1..s.mb {
                    worst = worst.max((self.marginal_a(a, x, y) - m0).abs());
                }
            }
        }
        for y in 0..s.mb {
            for b in 0..s.ob {
                let m0 = self.marginal_b(b, 0, y);
                for x in 1..s.ma {
                    worst = worst.max((self.marginal_b(b, x, y) - m0).abs());
                }
            }
        }
        worst
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let v = 1.0 / (scenario.oa * scenario.ob) as f64;
        Behavior { scenario, probs: vec![v; scenario.len()] }
    }

    /// Sub-behavior on the listed settings, in the given order.
    pub fn restrict(&self, xs: &[usize], ys: &[usize]) -> Result<Self> {
        let s = self.scenario;
        if xs.iter().any(|&x| x >= s.ma) || ys.iter().any(|&y| y >= s.mb) {
            return Err(Error::Invalid("setting index out of range".into()));
        }
        let t = Scenario { ma: xs.len(), mb: ys.len(), ..s };
        Behavior::from_fn(t, |a, b, x, y| self.p(a, b, xs[x], ys[y]))
    }

    /// `(1 − w) p + w · uniform`.
    pub fn white_noise_mix(&self, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::OutOfRange { name: "w", value: w });
        }
        let u = 1.0 / (self.scenario.oa * self.scenario.ob) as f64;
        let probs = self.probs.iter().map(|p| (1.0 - w) * p + w * u).collect();
        Ok(Behavior { scenario: self.scenario, probs })
    }

    /// Each party independently loses its outcome with probability 1 − η,
    /// reporting an extra no-click outcome appended last.
    pub fn apply_local_loss(&self, eta_a: f64, eta_b: f64) -> Result<Self> {
        let s = self.scenario;
        if s.phi_a.is_some() || s.phi_b.is_some() {
            return Err(Error::AlreadyLossy);
        }
        for (name, v) in [("eta_a", eta_a), ("eta_b", eta_b)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange { name, value: v });
            }
        }
        let t = Scenario { oa: s.oa + 1, ob: s.ob + 1, phi_a: Some(s.oa), phi_b: Some(s.ob), ..s };
        Behavior::from_fn(t, |a, b, x, y| {
            let (la, lb) = (a == s.oa, b == s.ob);
            match (la, lb) {
                (false, false) => eta_a * eta_b * self.p(a, b, x, y),
                (false, true) => eta_a * (1.0 - eta_b) * self.marginal_a(a, x, y),
                (true, false) => (1.0 - eta_a) * eta_b * self.marginal_b(b, x, y),
                (true, true) => (1.0 - eta_a) * (1.0 - eta_b),
            }
        })
    }

    /// CHSH value Σ (−1)^{xy} E(x, y) over settings 0 and 1.
    pub fn chsh(&self, binning: &Binning) -> Result<f64> {
        let s = &self.scenario;
        if s.ma < 2 || s.mb < 2 {
            return Err(Error::ChshUndefined);
        }
        if binning.a.len() != s.oa || binning.b.len() != s.ob {
            return Err(Error::Invalid("binning does not match outcome counts".into()));
        }
        let mut total = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                let mut e = 0.0;
                for a in 0..s.oa {
                    for b in 0..s.ob {
                        e += binning.a[a] * binning.b[b] * self.p(a, b, x, y);
                    }
                }
                total += if x * y == 1 { -e } else { e };
            }
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: Behavior = serde_json::from_str(text)?;
        b.validate()?;
        Ok(b)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let s = &self.scenario;
        w.write_record(["x", "y", "a", "b", "p"]).map_err(|e| Error::Io(e.to_string()))?;
        for x in 0..s.ma {
            for y in 0..s.mb {
                for a in 0..s.oa {
                    for b in 0..s.ob {
                        let rec = [x.to_string(), y.to_string(), a.to_string(), b.to_string(), format!("{:e}", self.p(a, b, x, y))];
                        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
                    }
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    /// Reads the long CSV form; the scenario shape is inferred from the indices.
    pub fn from_csv(text: &str, phi_a: Option<usize>, phi_b: Option<usize>) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            x: usize,
            y: usize,
            a: usize,
            b: usize,
            p: f64,
        }
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<Row> = rdr
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Invalid(e.to_string()))?;
        let dim = |f: fn(&Row) -> usize| rows.iter().map(f).max().map_or(0, |m| m + 1);
        let s = Scenario { ma: dim(|r| r.x), mb: dim(|r| r.y), oa: dim(|r| r.a), ob: dim(|r| r.b), phi_a, phi_b };
        let mut probs = vec![f64::NAN; s.len()];
        for r in &rows {
            probs[s.index(r.a, r.b, r.x, r.y)] = r.p;
        }
        Self::new(s, probs)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::from_csv(&text, None, None),
            _ => Self::from_json(&text),
        }
    }
}
