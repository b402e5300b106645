use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CUTOFF: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

/// Spatial location of a mode. Primed sites travel to the central station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Site {
    A,
    APrime,
    B,
    BPrime,
    Aux(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub site: Site,
    pub pol: Pol,
}

impl ModeLabel {
    pub const fn new(site: Site, pol: Pol) -> Self {
        ModeLabel { site, pol }
    }

    pub const fn aux(index: u8) -> Self {
        ModeLabel { site: Site::Aux(index), pol: Pol::H }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let site = match self.site {
            Site::A => "A".to_string(),
            Site::APrime => "A'".to_string(),
            Site::B => "B".to_string(),
            Site::BPrime => "B'".to_string(),
            Site::Aux(i) => return write!(f, "X{i}"),
        };
        let pol = match self.pol {
            Pol::H => "H",
            Pol::V => "V",
        };
        write!(f, "{site}_{pol}")
    }
}

/// Ordered list of modes with a common photon-number cutoff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRegister {
    labels: Vec<ModeLabel>,
    cutoff: u32,
}

impl ModeRegister {
    pub fn new(labels: Vec<ModeLabel>, cutoff: u32) -> Result<Self> {
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Invalid(format!("duplicate mode {l}")));
            }
        }
        Ok(ModeRegister { labels, cutoff })
    }

    pub fn with_default_cutoff(labels: Vec<ModeLabel>) -> Result<Self> {
        Self::new(labels, DEFAULT_CUTOFF)
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn index_of(&self, label: ModeLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| *l == label)
            .ok_or_else(|| Error::Invalid(format!("mode {label} not in register")))
    }

    pub fn indices_of(&self, labels: &[ModeLabel]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.index_of(*l)).collect()
    }

    pub(crate) fn check_occupation(&self, occ: &[u8]) -> Result<()> {
        for (i, &n) in occ.iter().enumerate() {
            if n as u32 > self.cutoff {
                return Err(Error::CutoffExceeded {
                    mode: self.labels[i].to_string(),
                    found: n as u32,
                    cutoff: self.cutoff,
                });
            }
        }
        Ok(())
    }
}
