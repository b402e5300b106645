//! Sparse truncated Fock-space simulation of linear-optical circuits.

mod detect;
mod optics;
mod register;
mod sources;
mod state;

pub use detect::{
    apply_loss, apply_loss_all, click_probabilities, lossy_threshold_detect, parse_pattern,
    threshold_detect,
};
pub use optics::{apply_mode_map, apply_mode_map_ket, ModeMap};
pub use register::{ModeLabel, ModeRegister, Pol, Site, DEFAULT_CUTOFF};
pub use sources::{
    psi_n, sp_probability, sp_state, spdc_pair_probability, spdc_state, spdc_state_on, SPDC_MODES,
};
pub use state::{FockKet, Occupation, Order, StateMixture, WeightedTerm, AMPLITUDE_TOL, WEIGHT_TOL};
