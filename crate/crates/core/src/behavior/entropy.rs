use super::Behavior;
use crate::error::{Error, Result};

/// Shannon entropy in bits; zero entries contribute nothing.
pub fn shannon(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

pub fn binary_entropy(x: f64) -> f64 {
    shannon(&[x, 1.0 - x])
}

/// `h((1 + √((S/2)² − 1)) / 2)`, with `S` clamped to `[2, 2√2]`.
pub fn chi(s: f64) -> f64 {
    let s = s.clamp(2.0, 2.0 * std::f64::consts::SQRT_2);
    let r = ((s / 2.0).powi(2) - 1.0).max(0.0).sqrt();
    binary_entropy((1.0 + r.min(1.0)) / 2.0)
}

/// H(A|B) at one setting pair.
pub fn conditional_entropy(b: &Behavior, x: usize, y: usize) -> Result<f64> {
    let s = &b.scenario;
    if x >= s.ma || y >= s.mb {
        return Err(Error::Invalid(format!("setting pair ({x}, {y}) out of range")));
    }
    let mut joint = Vec::with_capacity(s.oa * s.ob);
    for a in 0..s.oa {
        for bb in 0..s.ob {
            joint.push(b.p(a, bb, x, y).max(0.0));
        }
    }
    let marg: Vec<f64> = (0..s.ob).map(|bb| b.marginal_b(bb, x, y).max(0.0)).collect();
    Ok((shannon(&joint) - shannon(&marg)).max(0.0))
}
