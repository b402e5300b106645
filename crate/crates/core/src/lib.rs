//! Device-independent QKD with heralded single-photon sources: circuit
//! simulation, nonlocality and guessing-probability certification, and
//! key-rate optimization.

pub mod behavior;
pub mod certify;
pub mod conic;
pub mod error;
pub mod keyrate;
pub mod photonics;
pub mod schemes;

pub use error::{Error, Result};
