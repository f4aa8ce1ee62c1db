//! Splitting a compact `m`-shifted set into `m` parts, each with ordinary
//! family covers.
//!
//! Block `n` covers the set at `ε_n = base^(−(n+1))` with indices
//! `m·l_n … m·l_(n+1) − 1`, where index `mk + r` gets `f_k(ε_n)`. Part `j`
//! takes the residue-`j` intervals, and at `ε_n` its cover is
//! `J_k = I_(m(k+l_n)+j)`.

use serde::{Deserialize, Serialize};

use super::{compact_shift, intersect, CoverSource};
use crate::budget::{shift_family, EpsilonSpec, PowerFamily};
use crate::cover::{validate_labeled, LabeledCover};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartCover {
    pub eps: EpsilonSpec,
    pub cover: LabeledCover,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub m: u64,
    /// `l_0 = 0 < l_1 < … < l_(depth+1)`.
    pub cuts: Vec<u64>,
    /// Block `n`, valid for the shifted family at `ε_n`.
    pub blocks: Vec<LabeledCover>,
    /// Stage of part `j`: its residue intervals in the last block, meet the set.
    pub parts: Vec<IntervalSet>,
    /// `part_covers[j][n]` covers part `j` at `ε_n`.
    pub part_covers: Vec<Vec<PartCover>>,
}

pub fn decompose_m(src: &dyn CoverSource, fam: &PowerFamily, m: u64, depth: u32) -> Result<DecompositionResult> {
    let shifted = shift_family(fam, m)?;
    let base = src.base();
    let target = src.target()?;
    let mut cuts = vec![0u64];
    let mut blocks = Vec::new();
    let mut epss = Vec::new();
    for n in 0..=depth {
        let eps = EpsilonSpec::new(base, n + 1)?;
        let first = m * cuts[n as usize];
        let direct = src.family_cover(&shifted, &eps, first, 0);
        let cover = match (direct, first) {
            (Ok((_, c)), _) => c,
            (Err(_), f) if f > 0 => compact_shift(src, &shifted, f - 1, &eps)?.cover,
            (Err(e), _) => return Err(e),
        };
        validate_labeled(&target, &shifted, &eps, &cover)?;
        let top = cover.entries.iter().map(|e| e.index).max().unwrap_or(first);
        let next = ((top + 1).div_ceil(m)).max(cuts[n as usize] + 1);
        cuts.push(next);
        blocks.push(cover);
        epss.push(eps);
    }

    let last = blocks.last().expect("depth + 1 blocks");
    let mut parts = Vec::with_capacity(m as usize);
    let mut part_covers = Vec::with_capacity(m as usize);
    for j in 0..m {
        let own = IntervalSet::normalize_union(
            base,
            last.entries.iter().filter(|e| e.index % m == j).map(|e| e.interval.clone()).collect(),
        )?;
        let part = intersect(&own, &target)?;
        let mut per_eps = Vec::new();
        for (n, eps) in epss.iter().enumerate() {
            let mut cover = LabeledCover::default();
            for b in &blocks[n..] {
                for e in b.entries.iter().filter(|e| e.index % m == j) {
                    cover.push((e.index - j) / m - cuts[n], e.interval.clone());
                }
            }
            cover.sort();
            validate_labeled(&part, fam, eps, &cover)?;
            per_eps.push(PartCover { eps: eps.clone(), cover });
        }
        parts.push(part);
        part_covers.push(per_eps);
    }
    let mut joined = IntervalSet::empty(base);
    for p in &parts {
        joined = joined.union(p)?;
    }
    if !joined.covers(&target) {
        return Err(Error::InvalidCover("the parts do not cover the stage set".into()));
    }
    Ok(DecompositionResult { m, cuts, blocks, parts, part_covers })
}
