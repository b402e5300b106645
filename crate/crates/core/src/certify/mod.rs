//! Device-independent certification: local-polytope LPs and NPA guessing bounds.

mod guessing;
mod local;
mod moments;
mod truncation;

pub use guessing::{guessing_probability, guessing_probability_robust, BellFunctional, GuessingCertificate, GuessingProblem};
pub use local::{
    deterministic_strategies, local_analysis, local_membership, noise_robustness, DeterministicStrategy, LocalAnalysis,
};
pub use moments::{moment_structure, CgTerm, Level, MomentStructure, Op, Word};
pub use truncation::{epsilon_from_table, epsilon_upper, truncation_table, TruncationTable};
