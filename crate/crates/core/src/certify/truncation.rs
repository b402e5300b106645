use crate::error::Result;
use crate::photonics::{sp_probability, spdc_pair_probability};
use crate::schemes::{herald_probability_of_counts, SchemeConfig, SchemeKind};


#[derive(Debug, Clone, Copy)]
enum Source {
    Spdc(f64),
    Single(f64),
}

impl Source {
    fn probability(self, k: u32) -> f64 {
        match self {
            Source::Spdc(pbar) => spdc_pair_probability(pbar, k),
            Source::Single(p) => sp_probability(p, k),
        }
    }

    fn min_count(self) -> u32 {
        match self {
            Source::Spdc(_) => 0,
            Source::Single(_) => 1,
        }
    }

    fn order(self, k: u32) -> u32 {
        k - self.min_count()
    }
}

fn sources(cfg: &SchemeConfig) -> Vec<Source> {
    match cfg.scheme {
        SchemeKind::Sh => vec![Source::Spdc(cfg.pbar), Source::Single(cfg.p), Source::Single(cfg.p)],
        SchemeKind::Ch => vec![Source::Single(cfg.p); 4],
    }
}

/// Per-source photon counts of the box `K_n` (order at most `n + 1` per source).
fn box_points(src: &[Source], n: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for s in src {
        let lo = s.min_count();
        let hi = lo + n + 1;
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (lo..=hi).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out
}

/// Herald probability and source probability of every box point, with its order.
#[derive(Debug, Clone)]
pub struct TruncationTable {
    pub points: Vec<(Vec<u32>, u32, f64, f64)>,
    pub box_mass: f64,
}

pub fn truncation_table(cfg: &SchemeConfig, n: u32) -> Result<TruncationTable> {
    cfg.validate()?;
    let src = sources(cfg);
    let mut points = Vec::new();
    let mut box_mass = 0.0;
    for k in box_points(&src, n) {
        let pk: f64 = src.iter().zip(&k).map(|(s, &c)| s.probability(c)).product();
        box_mass += pk;
        if pk == 0.0 {
            continue;
        }
        let order: u32 = src.iter().zip(&k).map(|(s, &c)| s.order(c)).sum();
        let pc = herald_probability_of_counts(cfg, &k)?;
        points.push((k, order, pk, pc));
    }
    Ok(TruncationTable { points, box_mass })
}

/// Upper bound on the weight of heralded events beyond order `n`.
pub fn epsilon_upper(cfg: &SchemeConfig, n: u32) -> Result<f64> {
    let table = truncation_table(cfg, n)?;
    Ok(epsilon_from_table(&table, n))
}

pub fn epsilon_from_table(table: &TruncationTable, n: u32) -> f64 {
    let mut inside = 0.0;
    let mut total = 0.0;
    for &(_, order, pk, pc) in &table.points {
        total += pk * pc;
        if order <= n {
            inside += pk * pc;
        }
    }
    let den = total + (1.0 - table.box_mass).max(0.0);
    if den <= 0.0 {
        return 0.0;
    }
    (1.0 - inside / den).max(0.0)
}
