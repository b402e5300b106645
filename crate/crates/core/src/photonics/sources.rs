use std::sync::Arc;

use num_complex::Complex64;

use super::register::{ModeLabel, ModeRegister, Pol, Site, DEFAULT_CUTOFF};
use super::state::{FockKet, StateMixture};
use crate::error::{Error, Result};

/// Default SPDC modes: (a_H, a_V, b_H, b_V) = (A_H, A_V, A'_H, A'_V).
pub const SPDC_MODES: [ModeLabel; 4] = [
    ModeLabel::new(Site::A, Pol::H),
    ModeLabel::new(Site::A, Pol::V),
    ModeLabel::new(Site::APrime, Pol::H),
    ModeLabel::new(Site::APrime, Pol::V),
];

/// `L₊ⁿ|0⟩ / (n! √(n+1))` with `L₊ = a_H† b_V† − a_V† b_H†`.
pub fn psi_n(register: Arc<ModeRegister>, n: u32) -> Result<FockKet> {
    if register.len() != 4 {
        return Err(Error::Invalid("pair state needs a four-mode register".into()));
    }
    let amp = 1.0 / ((n + 1) as f64).sqrt();
    let terms = (0..=n).map(|k| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let (a, b) = ((n - k) as u8, k as u8);
        (vec![a, b, b, a], Complex64::new(sign * amp, 0.0))
    });
    FockKet::from_terms(register, terms)
}

/// Unnormalized two-mode squeezed vacuum Σ (n+1)(p̄/2)ⁿ |Ψₙ⟩⟨Ψₙ| with order tags (0, n).
pub fn spdc_state(pbar: f64, n_max: u32) -> Result<StateMixture> {
    spdc_state_on(SPDC_MODES, pbar, n_max)
}

pub fn spdc_state_on(modes: [ModeLabel; 4], pbar: f64, n_max: u32) -> Result<StateMixture> {
    if !(0.0..0.5).contains(&pbar) {
        return Err(Error::OutOfRange { name: "pbar", value: pbar });
    }
    let cutoff = DEFAULT_CUTOFF.max(n_max);
    let reg = Arc::new(ModeRegister::new(modes.to_vec(), cutoff)?);
    let mut s = StateMixture::new(reg.clone());
    for n in 0..=n_max {
        let w = (n + 1) as f64 * (pbar / 2.0).powi(n as i32);
        s.push(w, (0, n), psi_n(reg.clone(), n)?);
    }
    Ok(s)
}

/// Unnormalized single-photon source Σ_{n≥1} p^{n−1} |n⟩⟨n| with order tags (n−1, 0).
pub fn sp_state(mode: ModeLabel, p: f64, n_max: u32) -> Result<StateMixture> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::OutOfRange { name: "p", value: p });
    }
    if n_max == 0 {
        return Err(Error::Invalid("single-photon source needs n_max ≥ 1".into()));
    }
    let reg = Arc::new(ModeRegister::new(vec![mode], DEFAULT_CUTOFF.max(n_max))?);
    let mut s = StateMixture::new(reg.clone());
    for n in 1..=n_max {
        s.push(p.powi(n as i32 - 1), (n - 1, 0), FockKet::basis(reg.clone(), vec![n as u8])?);
    }
    Ok(s)
}

/// Normalized photon-pair number distribution of the SPDC source.
pub fn spdc_pair_probability(pbar: f64, n: u32) -> f64 {
    let q = pbar / 2.0;
    (1.0 - q).powi(2) * (n + 1) as f64 * q.powi(n as i32)
}

/// Normalized photon-number distribution of a single-photon source (n ≥ 1).
pub fn sp_probability(p: f64, n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (1.0 - p) * p.powi(n as i32 - 1)
}
