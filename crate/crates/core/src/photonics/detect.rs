use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::register::{ModeLabel, ModeRegister};
use super::state::{FockKet, Occupation, StateMixture};
use crate::error::{Error, Result};

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange { name: "efficiency", value: eta });
    }
    Ok(())
}

/// Pure-loss channel of transmissivity `eta` on one mode. Each term splits by
/// the number of photons lost.
pub fn apply_loss(state: &StateMixture, mode: ModeLabel, eta: f64) -> Result<StateMixture> {
    check_eta(eta)?;
    let reg = state.register().clone();
    let m = reg.index_of(mode)?;
    let mut out = StateMixture::new(reg.clone());
    for t in state.terms() {
        let mut by_lost: BTreeMap<u8, BTreeMap<Occupation, Complex64>> = BTreeMap::new();
        for (occ, amp) in t.ket.terms() {
            let n = occ[m] as u32;
            for k in 0..=n {
                let f = binomial(n, k) * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32);
                if f == 0.0 {
                    continue;
                }
                let mut o = occ.clone();
                o[m] -= k as u8;
                *by_lost.entry(k as u8).or_default().entry(o).or_default() += amp * f.sqrt();
            }
        }
        for (_, amps) in by_lost {
            out.push(t.weight, t.order, FockKet::from_map(reg.clone(), amps));
        }
    }
    Ok(out)
}

pub fn apply_loss_all(state: &StateMixture, modes: &[ModeLabel], eta: f64) -> Result<StateMixture> {
    let mut s = state.clone();
    for &m in modes {
        s = apply_loss(&s, m, eta)?;
    }
    Ok(s)
}

/// Threshold detection on `modes` with a 0/1 click pattern. Returns the
/// probability weight of the pattern and the unnormalized post-measurement
/// state on the remaining modes.
pub fn threshold_detect(
    state: &StateMixture,
    modes: &[ModeLabel],
    pattern: &[bool],
) -> Result<(f64, StateMixture)> {
    if modes.len() != pattern.len() {
        return Err(Error::Invalid("pattern length differs from detector count".into()));
    }
    let reg = state.register();
    let idx = reg.indices_of(modes)?;
    let keep: Vec<usize> = (0..reg.len()).filter(|i| !idx.contains(i)).collect();
    let labels = keep.iter().map(|&i| reg.labels()[i]).collect();
    let residual_reg = Arc::new(ModeRegister::new(labels, reg.cutoff())?);
    let mut out = StateMixture::new(residual_reg.clone());
    for t in state.terms() {
        let mut groups: BTreeMap<Occupation, BTreeMap<Occupation, Complex64>> = BTreeMap::new();
        for (occ, amp) in t.ket.terms() {
            let ok = idx.iter().zip(pattern).all(|(&i, &c)| (occ[i] > 0) == c);
            if !ok {
                continue;
            }
            let measured: Occupation = idx.iter().map(|&i| occ[i]).collect();
            let rest: Occupation = keep.iter().map(|&i| occ[i]).collect();
            *groups.entry(measured).or_default().entry(rest).or_default() += amp;
        }
        for (_, amps) in groups {
            out.push(t.weight, t.order, FockKet::from_map(residual_reg.clone(), amps));
        }
    }
    Ok((out.trace(), out))
}

pub fn parse_pattern(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Invalid(format!("bad click pattern {s:?}"))),
        })
        .collect()
}

/// Probabilities of all 2^k click patterns of lossy threshold detectors.
/// Pattern index has the first detector as its most significant bit.
pub fn click_probabilities(state: &StateMixture, modes: &[ModeLabel], etas: &[f64]) -> Result<Vec<f64>> {
    if modes.len() != etas.len() {
        return Err(Error::Invalid("one efficiency per detector is required".into()));
    }
    for &e in etas {
        check_eta(e)?;
    }
    let idx = state.register().indices_of(modes)?;
    let k = idx.len();
    let mut probs = vec![0.0; 1 << k];
    for t in state.terms() {
        for (occ, amp) in t.ket.terms() {
            let w = t.weight * amp.norm_sqr();
            let silent: Vec<f64> = idx
                .iter()
                .zip(etas)
                .map(|(&i, &e)| (1.0 - e).powi(occ[i] as i32))
                .collect();
            for (pat, p) in probs.iter_mut().enumerate() {
                let mut f = w;
                for (d, s) in silent.iter().enumerate() {
                    let click = pat >> (k - 1 - d) & 1 == 1;
                    f *= if click { 1.0 - s } else { *s };
                }
                *p += f;
            }
        }
    }
    Ok(probs)
}

/// Lossy threshold detection in one pass: equivalent to `apply_loss` on each
/// detected mode followed by `threshold_detect`.
pub fn lossy_threshold_detect(
    state: &StateMixture,
    modes: &[ModeLabel],
    etas: &[f64],
    pattern: &[bool],
) -> Result<(f64, StateMixture)> {
    if modes.len() != pattern.len() || modes.len() != etas.len() {
        return Err(Error::Invalid("pattern, efficiencies and detectors differ in length".into()));
    }
    for &e in etas {
        check_eta(e)?;
    }
    let reg = state.register();
    let idx = reg.indices_of(modes)?;
    let keep: Vec<usize> = (0..reg.len()).filter(|i| !idx.contains(i)).collect();
    let labels = keep.iter().map(|&i| reg.labels()[i]).collect();
    let residual_reg = Arc::new(ModeRegister::new(labels, reg.cutoff())?);
    let mut out = StateMixture::new(residual_reg.clone());
    for t in state.terms() {
        let mut groups: BTreeMap<Occupation, BTreeMap<Occupation, Complex64>> = BTreeMap::new();
        for (occ, amp) in t.ket.terms() {
            let measured: Occupation = idx.iter().map(|&i| occ[i]).collect();
            let rest: Occupation = keep.iter().map(|&i| occ[i]).collect();
            *groups.entry(measured).or_default().entry(rest).or_default() += amp;
        }
        for (measured, amps) in groups {
            let mut f = 1.0;
            for ((&n, &e), &c) in measured.iter().zip(etas).zip(pattern) {
                let silent = (1.0 - e).powi(n as i32);
                f *= if c { 1.0 - silent } else { silent };
            }
            if f > 0.0 {
                out.push(t.weight * f, t.order, FockKet::from_map(residual_reg.clone(), amps));
            }
        }
    }
    Ok((out.trace(), out))
}
