//! Cover-transforming procedures. Each consumes finite-stage cover data and
//! emits a labeled cover that is checked by the universal validator before
//! it is returned.

use std::cmp::Ordering;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::budget::{budget_length, EpsilonSpec, PowerFamily};
use crate::construct::nano::NanoScheme;
use crate::cover::LabeledCover;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::numeral::Numeral;

pub mod decompose;
pub mod merge;
pub mod null;
pub mod shift;

pub use decompose::{decompose_m, DecompositionResult, PartCover};
pub use merge::{smz_merge, Case2Book, MergeCase, MergeInput, MergePlan, NestedRows};
pub use null::{null_to_family, NullCoverInput, NullFamilyReport};
pub use shift::{compact_shift, sigma_union_cover, ShiftReport, SigmaUnion};

/// A compact set presented by nested finite stages. The set itself is
/// approximated by the deepest stage.
pub trait CoverSource {
    fn base(&self) -> u32;
    fn max_depth(&self) -> u32;
    fn stage_set(&self, depth: u32) -> Result<IntervalSet>;

    fn target(&self) -> Result<IntervalSet> {
        self.stage_set(self.max_depth())
    }

    /// Cover by the components of the shallowest stage `d ≥ min_depth` that
    /// fits: components by decreasing length take indices `first, first+1, …`.
    fn family_cover(&self, fam: &PowerFamily, eps: &EpsilonSpec, first: u64, min_depth: u32) -> Result<(u32, LabeledCover)> {
        for d in min_depth..=self.max_depth() {
            if let Some(c) = label_by_length(&self.stage_set(d)?, fam, eps, first)? {
                return Ok((d, c));
            }
        }
        Err(Error::HorizonExceeded(format!(
            "no stage of depth {min_depth}..={} fits the budgets at ε = {eps} from index {first}",
            self.max_depth()
        )))
    }
}

/// Labels the components of `set` by decreasing length from `first`, or
/// `None` when some component exceeds its budget.
pub fn label_by_length(set: &IntervalSet, fam: &PowerFamily, eps: &EpsilonSpec, first: u64) -> Result<Option<LabeledCover>> {
    let comps: Vec<&Interval> = set.intervals().iter().collect();
    let lens: Vec<Numeral> = comps.iter().map(|c| c.length()).collect();
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by(|&a, &b| lens[b].partial_cmp(&lens[a]).unwrap_or(Ordering::Equal));
    let mut out = LabeledCover::default();
    for (i, &c) in order.iter().enumerate() {
        let idx = first + i as u64;
        if lens[c] > budget_length(fam, idx, eps)? {
            return Ok(None);
        }
        out.push(idx, comps[c].clone());
    }
    Ok(Some(out))
}

/// Nested finite stages held in memory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSource {
    pub name: String,
    stages: Vec<IntervalSet>,
}

impl StageSource {
    pub fn new(name: impl Into<String>, stages: Vec<IntervalSet>) -> Result<Self> {
        let Some(first) = stages.first() else {
            return Err(Error::InvalidParameter("a stage source needs at least one stage".into()));
        };
        let base = first.base();
        for (d, w) in stages.windows(2).enumerate() {
            if w[1].base() != base {
                return Err(Error::BaseMismatch(base, w[1].base()));
            }
            if !w[0].covers(&w[1]) {
                return Err(Error::Precondition(format!("stage {} is not inside stage {d}", d + 1)));
            }
        }
        Ok(StageSource { name: name.into(), stages })
    }

    /// Stages `0..=max_depth` of the nano counterexample set.
    pub fn nano(sch: &NanoScheme, max_depth: u32) -> Result<Self> {
        let stages = (0..=max_depth).map(|d| sch.nano_stage(d).map(|s| s.set)).collect::<Result<_>>()?;
        StageSource::new(format!("nano[0..={max_depth}]"), stages)
    }

    /// A finite point set as a single degenerate stage.
    pub fn points(base: u32, pts: &[Numeral]) -> Result<Self> {
        let set = IntervalSet::normalize_union(base, pts.iter().cloned().map(Interval::point).collect())?;
        StageSource::new(format!("{} points", set.len()), vec![set])
    }

    /// The same stages moved by `offset`.
    pub fn translate(&self, offset: &Numeral) -> Result<Self> {
        let base = self.base();
        let stages = self
            .stages
            .iter()
            .map(|s| {
                let moved = s
                    .intervals()
                    .iter()
                    .map(|iv| Interval::new(iv.lo() + offset, iv.hi() + offset))
                    .collect::<Result<Vec<_>>>()?;
                IntervalSet::normalize_union(base, moved)
            })
            .collect::<Result<_>>()?;
        StageSource::new(format!("{} + {}", self.name, offset.approx_decimal()), stages)
    }

    pub fn stages(&self) -> &[IntervalSet] {
        &self.stages
    }
}

impl CoverSource for StageSource {
    fn base(&self) -> u32 {
        self.stages[0].base()
    }

    fn max_depth(&self) -> u32 {
        self.stages.len() as u32 - 1
    }

    fn stage_set(&self, depth: u32) -> Result<IntervalSet> {
        self.stages
            .get(depth as usize)
            .cloned()
            .ok_or(Error::DepthLimit { depth: depth as usize, limit: self.stages.len() - 1 })
    }
}

/// Pairwise intersection of two normalized sets.
pub fn intersect(a: &IntervalSet, b: &IntervalSet) -> Result<IntervalSet> {
    let mut out = Vec::new();
    for x in a.intervals() {
        for y in b.intervals() {
            if x.intersects(y) {
                let lo = if x.lo() >= y.lo() { x.lo() } else { y.lo() };
                let hi = if x.hi() <= y.hi() { x.hi() } else { y.hi() };
                out.push(Interval::new(lo.clone(), hi.clone())?);
            }
        }
    }
    IntervalSet::normalize_union(a.base(), out)
}

/// An interval of length `len` containing `x`, centered when the base is even.
pub fn around(x: &Numeral, len: &Numeral) -> Result<Interval> {
    let base = x.base();
    if base.is_multiple_of(2) {
        let half = len.scale_small(base as u64 / 2).shift(&BigInt::from(1));
        Interval::new(x - &half, x + &half)
    } else {
        Interval::with_length(x.clone(), len)
    }
}

/// Smallest `t'` with `t'·a > t·b`, i.e. `base^(−t'·a) < base^(−t·b)`.
pub(crate) fn smallest_exceeding(t: &BigInt, b: &BigInt, a: &BigInt) -> Result<BigInt> {
    if a <= &BigInt::from(0) {
        return Err(Error::Precondition("family exponent e(0) must be positive".into()));
    }
    Ok((t * b) / a + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(v: i64) -> Numeral {
        Numeral::from_int(2, v).unwrap()
    }

    #[test]
    fn nano_source_nests() {
        let src = StageSource::nano(&NanoScheme::default(), 2).unwrap();
        assert_eq!(src.stage_set(1).unwrap().len(), 6);
        assert_eq!(src.target().unwrap().len(), 504);
        assert!(src.stage_set(3).is_err());
    }

    #[test]
    fn rejects_unnested_stages() {
        let a = IntervalSet::normalize_union(2, vec![Interval::new(num(0), num(1)).unwrap()]).unwrap();
        let b = IntervalSet::normalize_union(2, vec![Interval::new(num(0), num(2)).unwrap()]).unwrap();
        assert!(StageSource::new("x", vec![a.clone(), b.clone()]).is_err());
        assert!(StageSource::new("x", vec![b, a]).is_ok());
    }

    #[test]
    fn family_cover_picks_shallowest_fit() {
        let src = StageSource::nano(&NanoScheme::default(), 2).unwrap();
        let fam = crate::budget::shift_family(&PowerFamily::nano(), 2).unwrap();
        // |I_k| = f_k(1/4) for the 2-nano family, labelled from 0 only stage 0 fits ε = 1/4
        let (d, c) = src.family_cover(&fam, &EpsilonSpec::new(2, 2).unwrap(), 0, 0).unwrap();
        assert_eq!((d, c.entries.len()), (0, 2));
        let (d, _) = src.family_cover(&fam, &EpsilonSpec::new(2, 3).unwrap(), 0, 0).unwrap();
        assert_eq!(d, 1);
        assert!(src.family_cover(&fam, &EpsilonSpec::new(2, 1000).unwrap(), 0, 0).is_err());
    }

    #[test]
    fn intersect_and_around() {
        let a = IntervalSet::normalize_union(2, vec![Interval::new(num(0), num(4)).unwrap()]).unwrap();
        let b = IntervalSet::normalize_union(
            2,
            vec![Interval::new(num(-1), num(1)).unwrap(), Interval::new(num(3), num(5)).unwrap()],
        )
        .unwrap();
        let c = intersect(&a, &b).unwrap();
        assert_eq!(c.intervals(), &[Interval::new(num(0), num(1)).unwrap(), Interval::new(num(3), num(4)).unwrap()]);
        let iv = around(&num(-5), &num(2)).unwrap();
        assert_eq!(iv, Interval::new(num(-6), num(-4)).unwrap());
        assert_eq!(smallest_exceeding(&BigInt::from(1), &BigInt::from(4), &BigInt::from(1)).unwrap(), BigInt::from(5));
    }
}
