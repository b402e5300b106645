use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::register::ModeLabel;
use super::state::{FockKet, Occupation, StateMixture};
use crate::error::{Error, Result};

const UNITARITY_TOL: f64 = 1e-10;

/// Linear map on creation operators: column `i` is the image of `a_i†`
/// expressed over the same list of modes.
#[derive(Debug, Clone)]
pub struct ModeMap {
    pub modes: Vec<ModeLabel>,
    pub matrix: DMatrix<Complex64>,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl ModeMap {
    pub fn new(modes: Vec<ModeLabel>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = modes.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Invalid("mode map matrix does not match its mode list".into()));
        }
        let m = ModeMap { modes, matrix };
        let dev = m.unitarity_deviation();
        if dev > UNITARITY_TOL {
            return Err(Error::NonUnitary { deviation: dev });
        }
        Ok(m)
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.modes.len();
        let g = self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(n, n);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `a† → √T a† − √(1−T) b†`, `b† → √(1−T) a† + √T b†`.
    pub fn beamsplitter(a: ModeLabel, b: ModeLabel, transmittance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(Error::OutOfRange { name: "transmittance", value: transmittance });
        }
        let t = transmittance.sqrt();
        let r = (1.0 - transmittance).sqrt();
        let m = DMatrix::from_row_slice(2, 2, &[re(t), re(r), re(-r), re(t)]);
        Self::new(vec![a, b], m)
    }

    /// Half-wave plate at angle θ acting on an (H, V) pair.
    pub fn half_wave_plate(h: ModeLabel, v: ModeLabel, theta: f64) -> Result<Self> {
        let (s, c) = (2.0 * theta).sin_cos();
        let m = DMatrix::from_row_slice(2, 2, &[re(c), re(s), re(s), re(-c)]);
        Self::new(vec![h, v], m)
    }

    /// Quarter-wave plate with fast axis at angle φ.
    pub fn quarter_wave_plate(h: ModeLabel, v: ModeLabel, phi: f64) -> Result<Self> {
        let (s, c) = phi.sin_cos();
        let i = Complex64::i();
        let off = (re(1.0) - i) * s * c;
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[re(c * c) + i * s * s, off, off, re(s * s) + i * c * c],
        );
        Self::new(vec![h, v], m)
    }

    /// Phase `e^{iφ}` on a single mode.
    pub fn phase(mode: ModeLabel, phi: f64) -> Result<Self> {
        Self::new(vec![mode], DMatrix::from_element(1, 1, Complex64::from_polar(1.0, phi)))
    }
}

fn sqrt_factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().sqrt()
}

fn map_ket(ket: &FockKet, idx: &[usize], m: &DMatrix<Complex64>) -> Result<FockKet> {
    let reg = ket.register().clone();
    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, amp) in ket.terms() {
        let mut base = occ.clone();
        let mut norm = 1.0;
        for &i in idx {
            norm *= sqrt_factorial(occ[i] as u32);
            base[i] = 0;
        }
        let mut poly: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        poly.insert(base, amp / norm);
        for (col, &i) in idx.iter().enumerate() {
            for _ in 0..occ[i] {
                let mut next = BTreeMap::new();
                for (o, c) in &poly {
                    for (row, &j) in idx.iter().enumerate() {
                        let f = m[(row, col)];
                        if f == Complex64::default() {
                            continue;
                        }
                        let mut o2 = o.clone();
                        o2[j] += 1;
                        *next.entry(o2).or_insert(Complex64::default()) += c * f;
                    }
                }
                poly = next;
            }
        }
        for (o, c) in poly {
            let s: f64 = idx.iter().map(|&j| sqrt_factorial(o[j] as u32)).product();
            *out.entry(o).or_default() += c * s;
        }
    }
    let k = FockKet::from_map(reg.clone(), out);
    for (occ, _) in k.terms() {
        reg.check_occupation(occ)?;
    }
    Ok(k)
}

/// Substitutes the creation operators of the mapped modes in every term.
pub fn apply_mode_map(state: &StateMixture, map: &ModeMap) -> Result<StateMixture> {
    let dev = map.unitarity_deviation();
    if dev > UNITARITY_TOL {
        return Err(Error::NonUnitary { deviation: dev });
    }
    let reg = state.register().clone();
    let idx = reg.indices_of(&map.modes)?;
    let mut out = StateMixture::new(reg);
    for t in state.terms() {
        let k = map_ket(&t.ket, &idx, &map.matrix)?;
        out.push(t.weight, t.order, k);
    }
    Ok(out)
}

pub fn apply_mode_map_ket(ket: &FockKet, map: &ModeMap) -> Result<FockKet> {
    let idx = ket.register().indices_of(&map.modes)?;
    map_ket(ket, &idx, &map.matrix)
}
