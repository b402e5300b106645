use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use diqkd::certify::Level;
use diqkd::conic::Tolerances;
use diqkd::keyrate::Budget;
use diqkd::schemes::SchemeConfig;

use crate::{CliError, CliResult};

/// Prefix of environment overrides, e.g. `DIQKD_SEED`, `DIQKD_WORKERS`.
pub const ENV_PREFIX: &str = "DIQKD_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scheme: SchemeConfig,
    pub tolerances: Tolerances,
    pub budget: Budget,
    pub level: Level,
    pub out: PathBuf,
    /// Fixed local efficiency for `optimize`; the scheme's own η's otherwise.
    pub eta_l: Option<f64>,
    /// Key-setting index for `certify`.
    pub x_star: usize,
    /// Truncation-error weight for `certify`.
    pub eps: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scheme: SchemeConfig::ch_default(),
            tolerances: Tolerances::default(),
            budget: Budget::default(),
            level: Level::default(),
            out: PathBuf::from("out"),
            eta_l: None,
            x_star: 0,
            eps: 0.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let cfg = match path {
            None => RunConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.scheme.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(e) = self.eta_l {
            if !(0.0..=1.0).contains(&e) {
                return Err(CliError::Config(format!("eta_l = {e} outside [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(CliError::Config(format!("eps = {} outside [0, 1]", self.eps)));
        }
        let t = &self.tolerances;
        if !(t.feasibility > 0.0 && t.gap > 0.0 && t.max_iterations > 0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        let b = &self.budget;
        if b.starts == 0 || b.evals == 0 || b.workers == 0 {
            return Err(CliError::Config("budget needs positive starts, evals and workers".into()));
        }
        Ok(())
    }
}
