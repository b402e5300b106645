use std::fmt::Write as _;

use super::sdp::{SdpConstraint, SdpProblem, SparseSym};
use super::Sense;
use crate::error::{Error, Result};

/// Plain-text triplet form of an SDP, one record per line.
pub fn write_dump(p: &SdpProblem) -> String {
    let mut s = String::new();
    let sense = match p.sense {
        Sense::Minimize => "min",
        Sense::Maximize => "max",
    };
    let blocks: Vec<String> = p.psd_blocks.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(s, "sense {sense}");
    let _ = writeln!(s, "blocks {}", blocks.join(" "));
    let _ = writeln!(s, "lp {}", p.lp_dim);
    let _ = writeln!(s, "free {}", p.free_dim);
    for (b, c) in p.c_psd.iter().enumerate() {
        for &(i, j, v) in &c.entries {
            let _ = writeln!(s, "c {b} {i} {j} {v:e}");
        }
    }
    for (k, v) in p.c_lp.iter().enumerate().filter(|(_, v)| **v != 0.0) {
        let _ = writeln!(s, "cl {k} {v:e}");
    }
    for (k, v) in p.c_free.iter().enumerate().filter(|(_, v)| **v != 0.0) {
        let _ = writeln!(s, "cf {k} {v:e}");
    }
    for (r, con) in p.constraints.iter().enumerate() {
        for (b, a) in &con.psd {
            for &(i, j, v) in &a.entries {
                let _ = writeln!(s, "a {r} {b} {i} {j} {v:e}");
            }
        }
        for &(k, v) in &con.lp {
            let _ = writeln!(s, "al {r} {k} {v:e}");
        }
        for &(k, v) in &con.free {
            let _ = writeln!(s, "af {r} {k} {v:e}");
        }
        let _ = writeln!(s, "b {r} {:e}", con.rhs);
    }
    s
}

pub fn read_dump(text: &str) -> Result<SdpProblem> {
    let bad = |line: &str| Error::Invalid(format!("malformed dump line {line:?}"));
    let mut p = SdpProblem::new(Sense::Minimize, Vec::new(), 0, 0);
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let f: Vec<&str> = line.split_whitespace().collect();
        let us = |i: usize| f.get(i).and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| bad(line));
        let fl = |i: usize| f.get(i).and_then(|t| t.parse::<f64>().ok()).ok_or_else(|| bad(line));
        let con = |p: &mut SdpProblem, r: usize| {
            while p.constraints.len() <= r {
                p.constraints.push(SdpConstraint::default());
            }
        };
        match f[0] {
            "sense" => {
                p.sense = match f.get(1) {
                    Some(&"min") => Sense::Minimize,
                    Some(&"max") => Sense::Maximize,
                    _ => return Err(bad(line)),
                }
            }
            "blocks" => {
                p.psd_blocks = (1..f.len()).map(us).collect::<Result<_>>()?;
                p.c_psd = vec![SparseSym::new(); p.psd_blocks.len()];
            }
            "lp" => {
                p.lp_dim = us(1)?;
                p.c_lp = vec![0.0; p.lp_dim];
            }
            "free" => {
                p.free_dim = us(1)?;
                p.c_free = vec![0.0; p.free_dim];
            }
            "c" => p.c_psd.get_mut(us(1)?).ok_or_else(|| bad(line))?.push(us(2)?, us(3)?, fl(4)?),
            "cl" => *p.c_lp.get_mut(us(1)?).ok_or_else(|| bad(line))? = fl(2)?,
            "cf" => *p.c_free.get_mut(us(1)?).ok_or_else(|| bad(line))? = fl(2)?,
            "a" => {
                let r = us(1)?;
                con(&mut p, r);
                let blk = us(2)?;
                let c = &mut p.constraints[r];
                match c.psd.iter_mut().find(|(b, _)| *b == blk) {
                    Some((_, m)) => m.push(us(3)?, us(4)?, fl(5)?),
                    None => {
                        let mut m = SparseSym::new();
                        m.push(us(3)?, us(4)?, fl(5)?);
                        c.psd.push((blk, m));
                    }
                }
            }
            "al" => {
                let r = us(1)?;
                con(&mut p, r);
                p.constraints[r].lp.push((us(2)?, fl(3)?));
            }
            "af" => {
                let r = us(1)?;
                con(&mut p, r);
                p.constraints[r].free.push((us(2)?, fl(3)?));
            }
            "b" => {
                let r = us(1)?;
                con(&mut p, r);
                p.constraints[r].rhs = fl(2)?;
            }
            _ => return Err(bad(line)),
        }
    }
    Ok(p)
}
