//! Spacing placement in base 13: intervals `I_k`, `k ∈ F(B)`, inside a host
//! interval, hung off a scaffold of 7-fold refinements.
//!
//! Scaffold level `i ≥ L` has `7·6^(i−L)` members of length `13^(−(i+1)!)`.
//! Member `j` of level `k > L` is child `q = j div 6^(k−L)` of
//! `K^(k−1)_(j mod 6^(k−L))`, placed at `parent.lo + 2q·len`. Members with
//! `q = 6` get no children; they form the thin set `T`, enumerated by level
//! and then by index, and `I_(a_i)` sits flush left in the `i`-th of them.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::numeral::{factorial, Numeral};

pub const BASE: u32 = 13;

/// `F(B) = ⋃_{n∈B} {4^n, …, 4^(n+1) − 1}`, ascending.
pub fn f_set(b: &BTreeSet<u64>) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for &n in b {
        if n > 20 {
            return Err(Error::InvalidParameter(format!("F({{{n}}}) is too large to enumerate")));
        }
        out.extend(4u64.pow(n as u32)..4u64.pow(n as u32 + 1));
    }
    Ok(out)
}

/// `13^(−e)`.
pub fn pow13(e: impl Into<BigInt>) -> Numeral {
    Numeral::from_power(BASE, e).expect("base 13")
}

/// `13^(−(k+1)!)`, the scaffold length at level `k` and the budget `f_k(1/13)`.
pub fn level_length(k: u64) -> Numeral {
    pow13(factorial(k + 1))
}

/// Least `L` with `13·13^(−(L+1)!) < |host|`.
pub fn least_level(host_len: &Numeral) -> Result<u64> {
    if !host_len.is_positive() || host_len.base() != BASE {
        return Err(Error::HostTooShort);
    }
    // 13^(−lead) ≤ |host| < 13^(−lead+1)
    let lead = host_len.leading_exponent().expect("nonzero").clone();
    let exact_power = host_len.as_power().is_some();
    let mut fact = BigInt::from(1);
    for l in 0..LEVEL_SEARCH_LIMIT {
        fact *= l + 1;
        let a = &fact - 1;
        if a > lead || (a == lead && !exact_power) {
            return Ok(l);
        }
    }
    Err(Error::HorizonExceeded(format!("scaffold level for a host of length 13^(−{lead})")))
}

const LEVEL_SEARCH_LIMIT: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ScaffoldRef {
    pub level: u64,
    pub j: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacingPlacement {
    pub index: u64,
    pub interval: Interval,
    pub node: ScaffoldRef,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacingScheme {
    pub m: u64,
    pub host: Interval,
    pub b: BTreeSet<u64>,
    pub l: u64,
    /// In increasing index order.
    pub placements: Vec<SpacingPlacement>,
}

fn pow6(e: u64) -> Result<u64> {
    6u64.checked_pow(e as u32).ok_or_else(|| Error::HorizonExceeded(format!("6^{e} scaffold members")))
}

/// Target length exponent `(m+1)!·(k+1)!` of `I_k`.
pub fn placed_exponent(m: u64, k: u64) -> BigInt {
    factorial(m + 1) * factorial(k + 1)
}

impl SpacingScheme {
    /// Left end of scaffold member `K^level_j`, from its ancestor path.
    pub fn scaffold_lo(host: &Interval, l: u64, node: ScaffoldRef) -> Result<Numeral> {
        if node.level < l || node.j >= 7 * pow6(node.level - l)? {
            return Err(Error::InvalidParameter(format!("no scaffold member K^{}_{}", node.level, node.j)));
        }
        let mut lo = host.lo().clone();
        let mut steps = Vec::new();
        let mut cur = node;
        while cur.level > l {
            let width = pow6(cur.level - l)?;
            steps.push((cur.level, cur.j / width));
            cur = ScaffoldRef { level: cur.level - 1, j: cur.j % width };
        }
        steps.push((l, cur.j));
        for (level, q) in steps.into_iter().rev() {
            lo = &lo + &level_length(level).scale_small(2 * q);
        }
        Ok(lo)
    }

    pub fn scaffold(&self, node: ScaffoldRef) -> Result<Interval> {
        let lo = SpacingScheme::scaffold_lo(&self.host, self.l, node)?;
        Interval::with_length(lo, &level_length(node.level))
    }

    /// The first `count` members of `T` in size order.
    pub fn thin_nodes(l: u64, count: usize) -> Result<Vec<ScaffoldRef>> {
        let mut out = Vec::with_capacity(count);
        let mut level = l;
        while out.len() < count {
            let width = pow6(level - l)?;
            for s in 6 * width..7 * width {
                if out.len() == count {
                    break;
                }
                out.push(ScaffoldRef { level, j: s });
            }
            level += 1;
        }
        Ok(out)
    }

    pub fn f(&self) -> Result<Vec<u64>> {
        f_set(&self.b)
    }

    /// Placements with index in `F({b})`.
    pub fn block(&self, b: u64) -> Vec<&SpacingPlacement> {
        let (lo, hi) = (4u64.pow(b as u32), 4u64.pow(b as u32 + 1));
        self.placements.iter().filter(|p| p.index >= lo && p.index < hi).collect()
    }
}

/// Runs the placement for step `m` in `host` over `F(B)`.
pub fn spacing_place(m: u64, host: &Interval, b: &BTreeSet<u64>) -> Result<SpacingScheme> {
    if host.base() != BASE {
        return Err(Error::BaseMismatch(BASE, host.base()));
    }
    let fs = f_set(b)?;
    let host_len = host.length();
    if let Some(&a0) = fs.first() {
        if host_len < pow13(factorial(a0 + 1) - 1) {
            return Err(Error::HostTooShort);
        }
    }
    let l = least_level(&host_len)?;
    let thin = SpacingScheme::thin_nodes(l, fs.len())?;
    let mut placements = Vec::with_capacity(fs.len());
    let m_fact = factorial(m + 1);
    // (a+1)! kept incrementally, fs is ascending
    let (mut a_fact, mut a_next) = (BigInt::from(1), 1u64);
    for (&a, &node) in fs.iter().zip(&thin) {
        while a_next <= a + 1 {
            a_fact *= a_next;
            a_next += 1;
        }
        let exp = &m_fact * &a_fact;
        // |K_i| ≥ |I_(a_i)|, i.e. (level+1)! ≤ (m+1)!(a+1)!
        if factorial(node.level + 1) > exp {
            return Err(Error::HostTooShort);
        }
        let lo = SpacingScheme::scaffold_lo(host, l, node)?;
        let interval = Interval::with_length(lo, &pow13(exp))?;
        placements.push(SpacingPlacement { index: a, interval, node });
    }
    Ok(SpacingScheme { m, host: host.clone(), b: b.clone(), l, placements })
}

/// Union of the placements with index in `F({b})`.
pub fn block_set(sch: &SpacingScheme, b: u64) -> Result<IntervalSet> {
    IntervalSet::normalize_union(BASE, sch.block(b).into_iter().map(|p| p.interval.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Interval {
        Interval::new(Numeral::zero(13).unwrap(), Numeral::from_int(13, 1).unwrap()).unwrap()
    }

    #[test]
    fn examples() {
        let sch = spacing_place(0, &unit(), &BTreeSet::from([1])).unwrap();
        assert_eq!(sch.l, 1);
        assert_eq!(sch.placements.len(), 12);
        assert_eq!(sch.placements[0].index, 4);
        assert_eq!(sch.placements[0].interval.length(), pow13(120));
        assert_eq!(f_set(&BTreeSet::from([1])).unwrap(), (4..16).collect::<Vec<_>>());
    }

    #[test]
    fn least_level_examples() {
        assert_eq!(least_level(&Numeral::from_int(13, 1).unwrap()).unwrap(), 1);
        assert_eq!(least_level(&Numeral::from_int(13, 14).unwrap()).unwrap(), 0);
        assert_eq!(least_level(&pow13(1)).unwrap(), 2);
    }

    #[test]
    fn scaffold_nesting() {
        let host = unit();
        for level in 2..4u64 {
            let width = 6u64.pow((level - 1) as u32);
            for j in 0..7 * width {
                let child = ScaffoldRef { level, j };
                let parent = ScaffoldRef { level: level - 1, j: j % width };
                let c = Interval::with_length(SpacingScheme::scaffold_lo(&host, 1, child).unwrap(), &level_length(level)).unwrap();
                let p = Interval::with_length(SpacingScheme::scaffold_lo(&host, 1, parent).unwrap(), &level_length(level - 1)).unwrap();
                assert!(p.contains(&c));
            }
        }
    }

    #[test]
    fn thin_enumeration() {
        let t = SpacingScheme::thin_nodes(1, 8).unwrap();
        assert_eq!(t[0], ScaffoldRef { level: 1, j: 6 });
        assert_eq!(t[1], ScaffoldRef { level: 2, j: 36 });
        assert_eq!(t[7], ScaffoldRef { level: 3, j: 216 });
    }

    #[test]
    fn host_too_short() {
        let tiny = Interval::with_length(Numeral::zero(13).unwrap(), &pow13(200)).unwrap();
        assert_eq!(spacing_place(0, &tiny, &BTreeSet::from([1])), Err(Error::HostTooShort));
        let empty = spacing_place(0, &tiny, &BTreeSet::new()).unwrap();
        assert!(empty.placements.is_empty());
    }
}
