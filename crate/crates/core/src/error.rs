use thiserror::Error;

use crate::conic::SolverStatus;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("photon number {found} in mode {mode} exceeds cutoff {cutoff}")]
    CutoffExceeded { mode: String, found: u32, cutoff: u32 },

    #[error("mode map is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("{name} = {value} is outside its admissible range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("behavior is not normalized for settings ({x}, {y}): sum = {sum}")]
    NotNormalized { x: usize, y: usize, sum: f64 },

    #[error("scenario has too few settings for CHSH")]
    ChshUndefined,

    #[error("behavior already carries a no-click outcome")]
    AlreadyLossy,

    #[error("behavior lies outside the relaxed quantum set")]
    OutsideQuantumSet,

    #[error("solver finished with status {0:?}")]
    Solver(SolverStatus),

    #[error("I/O: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Invalid(e.to_string())
    }
}
