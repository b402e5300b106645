use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::register::ModeRegister;
use crate::error::{Error, Result};

pub const AMPLITUDE_TOL: f64 = 1e-14;
pub const WEIGHT_TOL: f64 = 1e-18;

pub type Occupation = Vec<u8>;

/// Order tag: powers of (p, p̄) carried by a mixture term.
pub type Order = (u32, u32);

/// Sparse pure state over a mode register.
#[derive(Debug, Clone)]
pub struct FockKet {
    register: Arc<ModeRegister>,
    amps: BTreeMap<Occupation, Complex64>,
}

impl FockKet {
    pub fn zero(register: Arc<ModeRegister>) -> Self {
        FockKet { register, amps: BTreeMap::new() }
    }

    pub fn vacuum(register: Arc<ModeRegister>) -> Self {
        let occ = vec![0; register.len()];
        let mut k = Self::zero(register);
        k.amps.insert(occ, Complex64::new(1.0, 0.0));
        k
    }

    pub fn basis(register: Arc<ModeRegister>, occ: Occupation) -> Result<Self> {
        Self::from_terms(register, [(occ, Complex64::new(1.0, 0.0))])
    }

    pub fn from_terms<I>(register: Arc<ModeRegister>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let mut k = Self::zero(register);
        for (occ, a) in terms {
            if occ.len() != k.register.len() {
                return Err(Error::Invalid(format!(
                    "occupation has {} entries, register has {}",
                    occ.len(),
                    k.register.len()
                )));
            }
            *k.amps.entry(occ).or_default() += a;
        }
        k.prune();
        for occ in k.amps.keys() {
            k.register.check_occupation(occ)?;
        }
        Ok(k)
    }

    pub(crate) fn from_map(register: Arc<ModeRegister>, amps: BTreeMap<Occupation, Complex64>) -> Self {
        let mut k = FockKet { register, amps };
        k.prune();
        k
    }

    pub fn register(&self) -> &Arc<ModeRegister> {
        &self.register
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.amps.iter()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, occ: &[u8]) -> Complex64 {
        self.amps.get(occ).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &FockKet) -> Complex64 {
        self.amps
            .iter()
            .filter_map(|(o, a)| other.amps.get(o).map(|b| a.conj() * b))
            .sum()
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        for a in self.amps.values_mut() {
            *a *= s;
        }
        self.prune();
        self
    }

    pub fn max_photons(&self) -> u32 {
        self.amps.keys().map(|o| o.iter().map(|&n| n as u32).sum()).max().unwrap_or(0)
    }

    fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= AMPLITUDE_TOL);
    }

    /// Product state on the concatenated register.
    pub fn tensor(&self, other: &FockKet, register: Arc<ModeRegister>) -> FockKet {
        let mut amps = BTreeMap::new();
        for (o1, a1) in &self.amps {
            for (o2, a2) in &other.amps {
                let mut o = o1.clone();
                o.extend_from_slice(o2);
                amps.insert(o, a1 * a2);
            }
        }
        FockKet::from_map(register, amps)
    }
}

#[derive(Debug, Clone)]
pub struct WeightedTerm {
    pub weight: f64,
    pub order: Order,
    pub ket: FockKet,
}

/// Incoherent mixture Σ w_k |ψ_k⟩⟨ψ_k| of sparse kets, not necessarily normalized.
#[derive(Debug, Clone)]
pub struct StateMixture {
    register: Arc<ModeRegister>,
    terms: Vec<WeightedTerm>,
}

impl StateMixture {
    pub fn new(register: Arc<ModeRegister>) -> Self {
        StateMixture { register, terms: Vec::new() }
    }

    pub fn pure(ket: FockKet) -> Self {
        let mut m = Self::new(ket.register().clone());
        m.push(1.0, (0, 0), ket);
        m
    }

    pub fn register(&self) -> &Arc<ModeRegister> {
        &self.register
    }

    pub fn terms(&self) -> &[WeightedTerm] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<WeightedTerm> {
        self.terms
    }

    /// Adds a term, folding the ket norm into the weight.
    pub fn push(&mut self, weight: f64, order: Order, ket: FockKet) {
        let n = ket.norm_sqr();
        let w = weight * n;
        if w < WEIGHT_TOL || n == 0.0 {
            return;
        }
        let ket = ket.scaled(Complex64::new(1.0 / n.sqrt(), 0.0));
        self.terms.push(WeightedTerm { weight: w, order, ket });
    }

    pub fn trace(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for t in &mut self.terms {
            t.weight *= s;
        }
        self.terms.retain(|t| t.weight >= WEIGHT_TOL);
        self
    }

    /// Terms whose total order is at most `max_order`.
    pub fn truncated(&self, max_order: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.order.0 + t.order.1 <= max_order)
            .cloned()
            .collect();
        StateMixture { register: self.register.clone(), terms }
    }

    /// Terms carrying exactly the given order tag.
    pub fn component(&self, order: Order) -> Self {
        let terms = self.terms.iter().filter(|t| t.order == order).cloned().collect();
        StateMixture { register: self.register.clone(), terms }
    }

    /// Tensor product, dropping terms above `max_order` if given.
    pub fn tensor(&self, other: &StateMixture, max_order: Option<u32>) -> Result<Self> {
        let mut labels = self.register.labels().to_vec();
        labels.extend_from_slice(other.register.labels());
        let cutoff = self.register.cutoff().max(other.register.cutoff());
        let reg = Arc::new(ModeRegister::new(labels, cutoff)?);
        let mut out = StateMixture::new(reg.clone());
        for t1 in &self.terms {
            for t2 in &other.terms {
                let order = (t1.order.0 + t2.order.0, t1.order.1 + t2.order.1);
                if max_order.is_some_and(|m| order.0 + order.1 > m) {
                    continue;
                }
                let ket = t1.ket.tensor(&t2.ket, reg.clone());
                out.push(t1.weight * t2.weight, order, ket);
            }
        }
        Ok(out)
    }

    /// Same state with a different cutoff on an identical mode list.
    pub fn with_cutoff(&self, cutoff: u32) -> Result<Self> {
        let reg = Arc::new(ModeRegister::new(self.register.labels().to_vec(), cutoff)?);
        let mut out = StateMixture::new(reg.clone());
        for t in &self.terms {
            for occ in t.ket.amps.keys() {
                reg.check_occupation(occ)?;
            }
            let ket = FockKet { register: reg.clone(), amps: t.ket.amps.clone() };
            out.terms.push(WeightedTerm { weight: t.weight, order: t.order, ket });
        }
        Ok(out)
    }

    /// Combines terms that are the same single Fock state with the same order.
    pub fn merged_diagonal(self) -> Self {
        let mut acc: BTreeMap<(Order, Occupation), f64> = BTreeMap::new();
        let mut rest = Vec::new();
        for t in self.terms {
            if t.ket.amps.len() == 1 {
                let occ = t.ket.amps.keys().next().expect("one entry").clone();
                *acc.entry((t.order, occ)).or_insert(0.0) += t.weight;
            } else {
                rest.push(t);
            }
        }
        for ((order, occ), weight) in acc {
            let mut amps = BTreeMap::new();
            amps.insert(occ, Complex64::new(1.0, 0.0));
            rest.push(WeightedTerm { weight, order, ket: FockKet { register: self.register.clone(), amps } });
        }
        StateMixture { register: self.register, terms: rest }
    }

    /// Density matrix restricted to the given basis occupations.
    pub fn density_matrix(&self, basis: &[Occupation]) -> DMatrix<Complex64> {
        let d = basis.len();
        let mut rho = DMatrix::zeros(d, d);
        for t in &self.terms {
            let v: Vec<Complex64> = basis.iter().map(|o| t.ket.amplitude(o)).collect();
            for i in 0..d {
                for j in 0..d {
                    rho[(i, j)] += v[i] * v[j].conj() * t.weight;
                }
            }
        }
        rho
    }
}
