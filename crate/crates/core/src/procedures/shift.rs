//! Compact covers pushed past an index `k`, and joint covers of finitely
//! many compact sources in disjoint index blocks.
//!
//! With `ε = base^(−t)`: an `ε′`-cover `(I′_n)_{n≤l′}` with `f_0(ε′) < f_{2k}(ε)`,
//! then an `ε″`-cover `(I″_n)_{n≥1}` from a stage at least as deep, with
//! `f_0(ε″)` below `f_{k+l′}(ε)` and below every gap of the `I′`. The head
//! items `I″_1 … I″_(k+l′)` are binned by the `I′` containing them; the `k`
//! fullest bins are swallowed whole at indices `k+1…2k`, the leftover head
//! items take `2k+1…k+l′`, and `I″_n` keeps index `n` past `k+l′`.
//!
//! `I″_0` is left empty so that `k+l′` head items meet `l′` slots: with at
//! least `2k` of them swallowed, the rest fit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{smallest_exceeding, CoverSource};
use crate::budget::{EpsilonSpec, PowerFamily};
use crate::cover::{validate_labeled, LabeledCover};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub k: u64,
    pub eps1: EpsilonSpec,
    pub depth1: u32,
    pub l1: u64,
    pub eps2: EpsilonSpec,
    pub depth2: u32,
    /// Labels of the `I′` swallowed at `k+1…`.
    pub bins: Vec<u64>,
    /// Head items inside the chosen bins, counting unused labels `≤ k+l′`.
    pub swallowed: u64,
    pub cover: LabeledCover,
}

/// Covers the source's set with indices `> k` only.
pub fn compact_shift(src: &dyn CoverSource, fam: &PowerFamily, k: u64, eps: &EpsilonSpec) -> Result<ShiftReport> {
    if eps.base != src.base() {
        return Err(Error::BaseMismatch(src.base(), eps.base));
    }
    let target = src.target()?;
    let e0 = fam.exponent(0)?;

    let t1 = smallest_exceeding(&eps.t, &fam.exponent(2 * k)?, &e0)?;
    let eps1 = EpsilonSpec::new(eps.base, t1)?;
    let (depth1, cover1) = src.family_cover(fam, &eps1, 0, 0)?;
    let max1 = cover1.entries.iter().map(|e| e.index).max().unwrap_or(0);
    let l1 = max1.max(k + 1);
    let head = k + l1;

    let mut t2 = smallest_exceeding(&eps.t, &fam.exponent(head)?, &e0)?.max(eps.t.clone());
    let union1 = IntervalSet::normalize_union(eps.base, cover1.entries.iter().map(|e| e.interval.clone()).collect())?;
    if let Some(gap) = union1.min_gap() {
        // base^(−s) < gap
        let lead = gap.leading_exponent().expect("positive gap").clone();
        let s = if gap.as_power().is_some() { lead + 1 } else { lead };
        let need = (&s + &e0 - 1) / &e0;
        if need > t2 {
            t2 = need;
        }
    }
    let eps2 = EpsilonSpec::new(eps.base, t2)?;
    let (depth2, cover2) = src.family_cover(fam, &eps2, 1, depth1)?;

    // bin of each head item: the I′ containing it
    let by_label: BTreeMap<u64, _> = cover2.entries.iter().map(|e| (e.index, &e.interval)).collect();
    let mut bins: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut loose = Vec::new();
    let mut unused = 0u64;
    for n in 1..=head {
        match by_label.get(&n) {
            None => unused += 1,
            Some(iv) => match cover1.entries.iter().find(|e| e.interval.contains(iv)) {
                Some(b) => bins.entry(b.index).or_default().push(n),
                None => loose.push(n),
            },
        }
    }
    let mut ranked: Vec<(u64, Vec<u64>)> = bins.into_iter().collect();
    ranked.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
    let top: Vec<(u64, Vec<u64>)> = ranked.iter().take(k as usize).cloned().collect();
    for (_, items) in ranked.iter().skip(k as usize) {
        loose.extend(items);
    }
    loose.sort_unstable();
    let swallowed = unused + top.iter().map(|(_, v)| v.len() as u64).sum::<u64>();
    if swallowed < 2 * k {
        return Err(Error::Uncertified(format!(
            "pigeonhole: the {k} fullest bins hold {swallowed} of {head} head labels, fewer than {}",
            2 * k
        )));
    }

    let mut cover = LabeledCover::default();
    for (i, (b, _)) in top.iter().enumerate() {
        let iv = &cover1.entries.iter().find(|e| e.index == *b).expect("bin label").interval;
        cover.push(k + 1 + i as u64, iv.clone());
    }
    for (i, n) in loose.iter().enumerate() {
        cover.push(2 * k + 1 + i as u64, by_label[n].clone());
    }
    for e in cover2.entries.iter().filter(|e| e.index > head) {
        cover.push(e.index, e.interval.clone());
    }
    cover.sort();
    if let Some(bad) = cover.entries.iter().find(|e| e.index <= k) {
        return Err(Error::InvalidCover(format!("shifted cover uses index {} <= {k}", bad.index)));
    }
    validate_labeled(&target, fam, eps, &cover)?;
    Ok(ShiftReport {
        k,
        eps1,
        depth1,
        l1,
        eps2,
        depth2,
        bins: top.into_iter().map(|(b, _)| b).collect(),
        swallowed,
        cover,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaUnion {
    /// Per source: the `k` it was shifted past and its report.
    pub blocks: Vec<ShiftReport>,
    pub cover: LabeledCover,
}

/// Joint cover: each source is shifted past the last index used so far.
pub fn sigma_union_cover(srcs: &[&dyn CoverSource], fam: &PowerFamily, eps: &EpsilonSpec) -> Result<SigmaUnion> {
    let mut blocks = Vec::with_capacity(srcs.len());
    let mut cover = LabeledCover::default();
    let mut target = IntervalSet::empty(eps.base);
    let mut k = 0u64;
    for src in srcs {
        let r = compact_shift(*src, fam, k, eps)?;
        k = r.cover.entries.iter().map(|e| e.index).max().unwrap_or(k);
        cover.entries.extend(r.cover.entries.iter().cloned());
        target = target.union(&src.target()?)?;
        blocks.push(r);
    }
    validate_labeled(&target, fam, eps, &cover)?;
    Ok(SigmaUnion { blocks, cover })
}
