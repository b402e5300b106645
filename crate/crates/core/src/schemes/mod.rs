//! The side-heralded (SH) and central-heralded (CH) photonic schemes.

mod amplifier;
mod circuit;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use amplifier::{amplifier_reference, AmplifierEstimate};
pub use circuit::{
    behavior, behavior_ch, behavior_sh, build_ch_initial, build_sh_initial, herald, herald_ch, herald_sh,
    herald_probability_of_counts, leading_behavior, leading_component, leading_order_state, qubit_basis, target_state,
    HeraldedResult, HeraldedState, KEPT_MODES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    #[serde(rename = "SH")]
    Sh,
    #[serde(rename = "CH")]
    Ch,
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SchemeKind::Sh => "SH",
            SchemeKind::Ch => "CH",
        })
    }
}

/// Wave-plate angles of one polarization analyzer, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSetting {
    pub phi: f64,
    pub theta: f64,
}

impl MeasurementSetting {
    pub fn new(phi: f64, theta: f64) -> Self {
        let pi = std::f64::consts::PI;
        MeasurementSetting { phi: phi.rem_euclid(pi), theta: theta.rem_euclid(pi) }
    }

    /// Linear-polarization measurement with the HWP alone.
    pub fn linear(theta: f64) -> Self {
        Self::new(0.0, theta)
    }
}

fn default_truncation() -> u32 {
    2
}

/// Physical parameters of one scheme instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    #[serde(default)]
    pub pbar: f64,
    pub p: f64,
    #[serde(rename = "T")]
    pub transmittance: f64,
    pub t: f64,
    pub eta_d: f64,
    pub eta_h: f64,
    pub eta_t: f64,
    pub settings_a: Vec<MeasurementSetting>,
    pub settings_b: Vec<MeasurementSetting>,
    #[serde(default)]
    pub key_pair: (usize, usize),
    #[serde(default = "default_truncation")]
    pub truncation: u32,
    #[serde(default)]
    pub rescale_eta_t: bool,
}

impl SchemeConfig {
    /// CHSH-type linear settings: Alice at 0 and π/8, Bob at π/16 and −π/16
    /// (HWP angles are half the polarization angles).
    pub fn default_settings() -> (Vec<MeasurementSetting>, Vec<MeasurementSetting>) {
        let pi = std::f64::consts::PI;
        (
            vec![MeasurementSetting::linear(0.0), MeasurementSetting::linear(pi / 8.0)],
            vec![MeasurementSetting::linear(pi / 16.0), MeasurementSetting::linear(-pi / 16.0)],
        )
    }

    pub fn sh_default() -> Self {
        let (a, b) = Self::default_settings();
        SchemeConfig {
            scheme: SchemeKind::Sh,
            pbar: 1e-4,
            p: 1e-4,
            transmittance: 0.99,
            t: 0.0,
            eta_d: 1.0,
            eta_h: 1.0,
            eta_t: 1.0,
            settings_a: a,
            settings_b: b,
            key_pair: (0, 0),
            truncation: 2,
            rescale_eta_t: false,
        }
    }

    pub fn ch_default() -> Self {
        SchemeConfig { scheme: SchemeKind::Ch, pbar: 0.0, transmittance: 0.01, ..Self::sh_default() }
    }

    /// Sets every local efficiency to η_l.
    pub fn with_local_efficiency(mut self, eta_l: f64) -> Self {
        self.eta_d = eta_l;
        self.eta_h = eta_l;
        self
    }

    /// Transmission efficiency actually applied in the circuit.
    pub fn effective_eta_t(&self) -> f64 {
        if self.rescale_eta_t && self.scheme == SchemeKind::Ch {
            self.eta_t * self.eta_d
        } else {
            self.eta_t
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("p", self.p),
            ("T", self.transmittance),
            ("t", self.t),
            ("eta_d", self.eta_d),
            ("eta_h", self.eta_h),
            ("eta_t", self.eta_t),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::OutOfRange { name, value: v });
            }
        }
        if self.p >= 1.0 {
            return Err(Error::OutOfRange { name: "p", value: self.p });
        }
        if !(0.0..0.5).contains(&self.pbar) {
            return Err(Error::OutOfRange { name: "pbar", value: self.pbar });
        }
        if self.truncation > 2 {
            return Err(Error::Invalid(format!("truncation {} exceeds 2", self.truncation)));
        }
        if self.settings_a.is_empty() || self.settings_b.is_empty() {
            return Err(Error::Invalid("each party needs at least one setting".into()));
        }
        if self.key_pair.0 >= self.settings_a.len() || self.key_pair.1 >= self.settings_b.len() {
            return Err(Error::Invalid("key pair refers to a missing setting".into()));
        }
        for s in self.settings_a.iter().chain(&self.settings_b) {
            if !s.phi.is_finite() || !s.theta.is_finite() {
                return Err(Error::Invalid("non-finite measurement angle".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: SchemeConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
