use serde::{Deserialize, Serialize};

use super::{maximize_key, transmission, Budget, FixedParams, KeyRateReport, Objective, Search};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "L_km")]
    pub l_km: f64,
    pub eta_t: f64,
    pub p_herald: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub r_down: f64,
    #[serde(rename = "K_bits_per_s")]
    pub k_bits_per_s: f64,
}

impl From<(&KeyRateReport, f64)> for SweepRow {
    fn from((r, l_km): (&KeyRateReport, f64)) -> Self {
        SweepRow {
            l_km,
            eta_t: r.config.eta_t,
            p_herald: r.p_herald,
            g: r.g,
            h: r.h,
            r_down: r.r_down,
            k_bits_per_s: r.k,
        }
    }
}

/// Optimized key rate at each distance, in grid order. Each point is
/// warm-started from the optimum of the previous one.
pub fn distance_sweep(search: &Search, l_grid: &[f64], budget: &Budget) -> Result<Vec<(SweepRow, KeyRateReport)>> {
    let mut out: Vec<(SweepRow, KeyRateReport)> = Vec::with_capacity(l_grid.len());
    let mut warm = None;
    for &l in l_grid {
        let at = Search {
            fixed: FixedParams { eta_t: transmission(l), ..search.fixed },
            objective: Objective::KeyRate,
            ..*search
        };
        let rep = maximize_key(&at, budget, warm.take())?;
        warm = Some(rep.trace.best_point.clone());
        out.push((SweepRow::from((&rep, l)), rep));
    }
    Ok(out)
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}
