//! Closed intervals with exact endpoints and normalized finite unions.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeral::Numeral;

/// Closed interval `[lo, hi]`, `lo <= hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct Interval {
    lo: Numeral,
    hi: Numeral,
}

#[derive(Deserialize)]
struct RawInterval {
    lo: Numeral,
    hi: Numeral,
}

impl TryFrom<RawInterval> for Interval {
    type Error = Error;
    fn try_from(r: RawInterval) -> Result<Self> {
        Interval::new(r.lo, r.hi)
    }
}

impl Interval {
    pub fn new(lo: Numeral, hi: Numeral) -> Result<Self> {
        match lo.try_cmp(&hi)? {
            Ordering::Greater => Err(Error::InvalidInterval),
            _ => Ok(Interval { lo, hi }),
        }
    }

    /// `[lo, lo + len]`.
    pub fn with_length(lo: Numeral, len: &Numeral) -> Result<Self> {
        let hi = lo.try_add(len)?;
        Interval::new(lo, hi)
    }

    pub fn point(x: Numeral) -> Self {
        Interval { hi: x.clone(), lo: x }
    }

    pub fn lo(&self) -> &Numeral {
        &self.lo
    }

    pub fn hi(&self) -> &Numeral {
        &self.hi
    }

    pub fn base(&self) -> u32 {
        self.lo.base()
    }

    pub fn length(&self) -> Numeral {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Closed intervals meet (touching counts).
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_point(&self, x: &Numeral) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Strict containment with both endpoints interior or the intervals unequal.
    pub fn strictly_contains(&self, other: &Interval) -> bool {
        self.contains(other) && self != other
    }

    /// Gap between the intervals; zero when they meet.
    pub fn distance(&self, other: &Interval) -> Numeral {
        if self.hi < other.lo {
            &other.lo - &self.hi
        } else if other.hi < self.lo {
            &self.lo - &other.hi
        } else {
            Numeral::zero(self.base()).expect("valid base")
        }
    }
}

/// Sorted, pairwise disjoint and non-touching closed intervals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSet")]
pub struct IntervalSet {
    base: u32,
    intervals: Vec<Interval>,
}

#[derive(Deserialize)]
struct RawSet {
    #[serde(default)]
    base: Option<u32>,
    intervals: Vec<Interval>,
}

impl TryFrom<RawSet> for IntervalSet {
    type Error = Error;
    fn try_from(r: RawSet) -> Result<Self> {
        let base = r.base.or_else(|| r.intervals.first().map(|i| i.base())).unwrap_or(2);
        let set = IntervalSet::normalize_union(base, r.intervals.clone())?;
        if set.intervals != r.intervals {
            return Err(Error::InvalidParameter("interval set is not in canonical order".into()));
        }
        Ok(set)
    }
}

impl IntervalSet {
    pub fn empty(base: u32) -> Self {
        IntervalSet { base, intervals: Vec::new() }
    }

    /// Sort-and-merge; overlapping or touching intervals coalesce.
    pub fn normalize_union(base: u32, mut raw: Vec<Interval>) -> Result<Self> {
        if let Some(bad) = raw.iter().find(|i| i.base() != base) {
            return Err(Error::BaseMismatch(base, bad.base()));
        }
        raw.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal));
        let mut out: Vec<Interval> = Vec::with_capacity(raw.len());
        for iv in raw {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        Ok(IntervalSet { base, intervals: out })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn union(&self, other: &IntervalSet) -> Result<IntervalSet> {
        let mut all = self.intervals.clone();
        all.extend(other.intervals.iter().cloned());
        IntervalSet::normalize_union(self.base, all)
    }

    /// Smallest distance between consecutive components.
    pub fn min_gap(&self) -> Option<Numeral> {
        self.intervals
            .windows(2)
            .map(|w| &w[1].lo - &w[0].hi)
            .min_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
    }

    /// Most components a single closed interval of length `len` can meet.
    ///
    /// A best window can always be slid right until its left end sits on the
    /// right end of the first component it meets, so only those placements
    /// are evaluated.
    pub fn max_hit_count(&self, len: &Numeral) -> usize {
        let n = self.intervals.len();
        let mut best = 0;
        for i in 0..n {
            let reach = &self.intervals[i].hi + len;
            // components i.. with lo <= reach form a prefix of the tail
            let tail = &self.intervals[i..];
            let count = tail.partition_point(|c| c.lo <= reach);
            best = best.max(count);
        }
        best
    }

    pub fn measure(&self) -> Numeral {
        self.intervals
            .iter()
            .fold(Numeral::zero(self.base).expect("valid base"), |acc, iv| &acc + &iv.length())
    }

    pub fn contains_point(&self, x: &Numeral) -> bool {
        let idx = self.intervals.partition_point(|c| &c.hi < x);
        idx < self.intervals.len() && self.intervals[idx].lo <= *x
    }

    /// Every point of `other` lies in this set.
    pub fn covers(&self, other: &IntervalSet) -> bool {
        other.intervals.iter().all(|iv| {
            let idx = self.intervals.partition_point(|c| c.hi < iv.lo);
            idx < self.intervals.len() && self.intervals[idx].contains(iv)
        })
    }
}
