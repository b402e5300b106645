use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, Scenario};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "1+AB")]
    OnePlusAB,
    #[serde(rename = "2")]
    Two,
}

impl Default for Level {
    fn default() -> Self {
        Level::OnePlusAB
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Level::One),
            "1+AB" | "1+ab" => Ok(Level::OnePlusAB),
            "2" => Ok(Level::Two),
            other => Err(Error::Invalid(format!("unsupported hierarchy level '{other}'"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::One => "1",
            Level::OnePlusAB => "1+AB",
            Level::Two => "2",
        })
    }
}

/// Projector `(setting, outcome)` of one party.
pub type Op = (u8, u8);

/// Operator product, Alice's string then Bob's; the parties commute.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    pub a: Vec<Op>,
    pub b: Vec<Op>,
}

impl Word {
    pub fn identity() -> Self {
        Word { a: Vec::new(), b: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.a.len() + self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn adjoint(&self) -> Word {
        Word { a: self.a.iter().rev().copied().collect(), b: self.b.iter().rev().copied().collect() }
    }
}

/// Idempotence and same-setting orthogonality; `None` is the zero operator.
fn reduce(ops: impl IntoIterator<Item = Op>) -> Option<Vec<Op>> {
    let mut out: Vec<Op> = Vec::new();
    for op in ops {
        match out.last() {
            Some(&top) if top.0 == op.0 => {
                if top.1 != op.1 {
                    return None;
                }
            }
            _ => out.push(op),
        }
    }
    Some(out)
}

/// `u† v`, reduced.
fn product(u: &Word, v: &Word) -> Option<Word> {
    let a = reduce(u.a.iter().rev().copied().chain(v.a.iter().copied()))?;
    let b = reduce(u.b.iter().rev().copied().chain(v.b.iter().copied()))?;
    Some(Word { a, b })
}

/// Real relaxation: a moment and its adjoint share a class.
fn canonical(w: Word) -> Word {
    let adj = w.adjoint();
    if adj < w {
        adj
    } else {
        w
    }
}

/// Where each Collins–Gisin behavior entry lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgTerm {
    Norm,
    Alice { x: usize, a: usize },
    Bob { y: usize, b: usize },
    Joint { x: usize, a: usize, y: usize, b: usize },
}

#[derive(Debug, Clone)]
pub struct MomentStructure {
    pub scenario: Scenario,
    pub level: Level,
    pub words: Vec<Word>,
    /// Class of each cell; `None` for vanishing products.
    pub cells: Vec<Vec<Option<usize>>>,
    pub n_classes: usize,
    /// Behavior terms and their classes; the first is the normalization.
    pub cg: Vec<(CgTerm, usize)>,
    class_words: Vec<Word>,
}

fn alice_ops(s: &Scenario) -> Vec<Op> {
    let mut v = Vec::new();
    for x in 0..s.ma {
        for a in 0..s.oa - 1 {
            v.push((x as u8, a as u8));
        }
    }
    v
}

fn bob_ops(s: &Scenario) -> Vec<Op> {
    let mut v = Vec::new();
    for y in 0..s.mb {
        for b in 0..s.ob - 1 {
            v.push((y as u8, b as u8));
        }
    }
    v
}

pub fn moment_structure(s: &Scenario, level: Level) -> Result<MomentStructure> {
    if s.oa < 2 || s.ob < 2 || s.ma == 0 || s.mb == 0 || s.oa > 255 || s.ma > 255 || s.ob > 255 || s.mb > 255 {
        return Err(Error::Invalid("scenario too small or too large for moment construction".into()));
    }
    let ao = alice_ops(s);
    let bo = bob_ops(s);
    let mut words = vec![Word::identity()];
    words.extend(ao.iter().map(|&o| Word { a: vec![o], b: vec![] }));
    words.extend(bo.iter().map(|&o| Word { a: vec![], b: vec![o] }));
    match level {
        Level::One => {}
        Level::OnePlusAB => {
            for &p in &ao {
                for &q in &bo {
                    words.push(Word { a: vec![p], b: vec![q] });
                }
            }
        }
        Level::Two => {
            let mut seen: std::collections::HashSet<Word> = words.iter().cloned().collect();
            let singles: Vec<Word> = words[1..].to_vec();
            for u in &singles {
                for v in &singles {
                    let w = Word { a: u.a.iter().chain(&v.a).copied().collect(), b: u.b.iter().chain(&v.b).copied().collect() };
                    if let (Some(a), Some(b)) = (reduce(w.a), reduce(w.b)) {
                        let w = Word { a, b };
                        if seen.insert(w.clone()) {
                            words.push(w);
                        }
                    }
                }
            }
        }
    }

    let n = words.len();
    let mut index: HashMap<Word, usize> = HashMap::new();
    let mut class_words = Vec::new();
    let mut cells = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            if let Some(w) = product(&words[i], &words[j]) {
                let key = canonical(w);
                let next = index.len();
                let id = *index.entry(key.clone()).or_insert_with(|| {
                    class_words.push(key);
                    next
                });
                cells[i][j] = Some(id);
                cells[j][i] = Some(id);
            }
        }
    }

    let lookup = |w: Word| -> Result<usize> {
        index.get(&canonical(w)).copied().ok_or_else(|| Error::Invalid("behavior term missing from moment matrix".into()))
    };
    let mut cg = vec![(CgTerm::Norm, lookup(Word::identity())?)];
    for &(x, a) in &ao {
        cg.push((CgTerm::Alice { x: x as usize, a: a as usize }, lookup(Word { a: vec![(x, a)], b: vec![] })?));
    }
    for &(y, b) in &bo {
        cg.push((CgTerm::Bob { y: y as usize, b: b as usize }, lookup(Word { a: vec![], b: vec![(y, b)] })?));
    }
    for &(x, a) in &ao {
        for &(y, b) in &bo {
            let t = CgTerm::Joint { x: x as usize, a: a as usize, y: y as usize, b: b as usize };
            cg.push((t, lookup(Word { a: vec![(x, a)], b: vec![(y, b)] })?));
        }
    }
    Ok(MomentStructure { scenario: *s, level, words, cells, n_classes: index.len(), cg, class_words })
}

impl MomentStructure {
    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn class_word(&self, k: usize) -> &Word {
        &self.class_words[k]
    }

    pub fn class_of(&self, w: &Word) -> Option<usize> {
        self.class_words.iter().position(|c| *c == canonical(w.clone()))
    }

    /// Collins–Gisin values of `b`; marginals are averaged over the other party's setting.
    pub fn cg_values(&self, b: &Behavior) -> Vec<f64> {
        let s = &self.scenario;
        self.cg
            .iter()
            .map(|(t, _)| match *t {
                CgTerm::Norm => 1.0,
                CgTerm::Alice { x, a } => (0..s.mb).map(|y| b.marginal_a(a, x, y)).sum::<f64>() / s.mb as f64,
                CgTerm::Bob { y, b: bb } => (0..s.ma).map(|x| b.marginal_b(bb, x, y)).sum::<f64>() / s.ma as f64,
                CgTerm::Joint { x, a, y, b: bb } => b.p(a, bb, x, y),
            })
            .collect()
    }

    /// Spread Collins–Gisin coefficients onto full behavior entries; returns (constant, coefficients).
    pub fn expand_functional(&self, coeffs: &[f64]) -> (f64, Vec<f64>) {
        let s = &self.scenario;
        let mut out = vec![0.0; s.len()];
        let mut constant = 0.0;
        for ((t, _), &c) in self.cg.iter().zip(coeffs) {
            match *t {
                CgTerm::Norm => constant += c,
                CgTerm::Alice { x, a } => {
                    for y in 0..s.mb {
                        for bb in 0..s.ob {
                            out[s.index(a, bb, x, y)] += c / s.mb as f64;
                        }
                    }
                }
                CgTerm::Bob { y, b } => {
                    for x in 0..s.ma {
                        for aa in 0..s.oa {
                            out[s.index(aa, b, x, y)] += c / s.ma as f64;
                        }
                    }
                }
                CgTerm::Joint { x, a, y, b } => out[s.index(a, b, x, y)] += c,
            }
        }
        (constant, out)
    }
}
