use std::f64::consts::SQRT_2;

use crate::behavior::{binary_entropy, chi};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplifierEstimate {
    pub lambda: f64,
    pub chsh_upper: f64,
    pub r_estimate: f64,
}

/// Qubit-amplifier estimate: heralded state `λη_t p̄ |ψ⁻⟩⟨ψ⁻| + |vac⟩⟨vac|`
/// up to normalization, scored by the CHSH chain.
pub fn amplifier_reference(pbar: f64, transmittance: f64, eta_t: f64) -> Result<AmplifierEstimate> {
    if !(0.0..1.0).contains(&transmittance) {
        return Err(Error::OutOfRange { name: "T", value: transmittance });
    }
    if pbar < 0.0 || !(0.0..=1.0).contains(&eta_t) {
        return Err(Error::OutOfRange { name: "eta_t", value: eta_t });
    }
    let lambda = transmittance / (1.0 - transmittance);
    let x = lambda * eta_t * pbar;
    let chsh_upper = (2.0 + x * 2.0 * SQRT_2) / (1.0 + x);
    let lambda_bar = x / (1.0 + x);
    let h_xy = 1.0 - binary_entropy(lambda_bar);
    let r_estimate = (1.0 - chi(chsh_upper)) - h_xy;
    Ok(AmplifierEstimate { lambda, chsh_upper, r_estimate })
}
