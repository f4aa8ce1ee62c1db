//! Nested chains certifying that a candidate cover misses a point, and their
//! re-verification from interval data alone.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::numeral::Numeral;

/// One node of a chain. `hi = None` marks a length too small to
/// materialize: positive, and below every nonzero numeral in play.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub label: String,
    pub lo: Numeral,
    pub hi: Option<Numeral>,
    /// The node is disjoint from every `J_i` with `i < bound`.
    #[serde(with = "crate::serde_big")]
    pub bound: BigInt,
}

impl ChainStep {
    pub fn from_interval(label: String, iv: &Interval, bound: BigInt) -> Self {
        ChainStep { label, lo: iv.lo().clone(), hi: Some(iv.hi().clone()), bound }
    }

    pub fn meets(&self, j: &Interval) -> bool {
        if j.hi() < &self.lo {
            return false;
        }
        match &self.hi {
            Some(hi) => j.lo() <= hi,
            None => j.lo() <= &self.lo,
        }
    }

    /// `self ⊊ parent`.
    fn strictly_inside(&self, parent: &ChainStep) -> bool {
        if self.lo < parent.lo {
            return false;
        }
        match (&self.hi, &parent.hi) {
            (Some(h), Some(ph)) => h <= ph && (self.lo != parent.lo || h != ph),
            (None, Some(ph)) => &self.lo < ph,
            // both symbolic: only the left end is comparable
            (None, None) => self.lo > parent.lo,
            (Some(_), None) => false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainWitness {
    pub scheme: String,
    pub steps: Vec<ChainStep>,
}

impl ChainWitness {
    pub fn depth(&self) -> usize {
        self.steps.len()
    }
}

/// Outcome of an adversary search: a certified chain or an honest give-up.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum WitnessOutcome {
    Defeated { chain: ChainWitness },
    Inconclusive { reason: String, partial: ChainWitness },
}

impl WitnessOutcome {
    pub fn chain(&self) -> &ChainWitness {
        match self {
            WitnessOutcome::Defeated { chain } => chain,
            WitnessOutcome::Inconclusive { partial, .. } => partial,
        }
    }

    pub fn is_defeated(&self) -> bool {
        matches!(self, WitnessOutcome::Defeated { .. })
    }
}

/// Independent check: strictly nested steps, strictly increasing bounds, and
/// every step disjoint from the placed budgets below its bound.
pub fn verify_chain(w: &ChainWitness, placed: &[Option<Interval>]) -> Result<()> {
    if w.steps.is_empty() {
        return Err(Error::Uncertified("empty chain".into()));
    }
    for (t, step) in w.steps.iter().enumerate() {
        if let Some(hi) = &step.hi {
            if hi <= &step.lo {
                return Err(Error::Uncertified(format!("step {t} ({}) is degenerate", step.label)));
            }
        }
        if t > 0 {
            let prev = &w.steps[t - 1];
            if !step.strictly_inside(prev) {
                return Err(Error::Uncertified(format!("step {t} ({}) is not strictly inside {}", step.label, prev.label)));
            }
            if step.bound <= prev.bound {
                return Err(Error::Uncertified(format!("bound does not increase at step {t}")));
            }
        }
        for (i, j) in placed.iter().enumerate() {
            if BigInt::from(i) >= step.bound {
                break;
            }
            if let Some(j) = j {
                if step.meets(j) {
                    return Err(Error::Uncertified(format!("step {t} ({}) meets J_{i}", step.label)));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: i64, e: i64) -> Numeral {
        Numeral::from_int(2, v).unwrap().shift(&BigInt::from(e))
    }

    fn step(label: &str, lo: Numeral, hi: Option<Numeral>, bound: i64) -> ChainStep {
        ChainStep { label: label.into(), lo, hi, bound: BigInt::from(bound) }
    }

    #[test]
    fn nesting_and_bounds() {
        let outer = step("a", n(0, 0), Some(n(1, 0)), 1);
        let inner = step("b", n(1, 2), Some(n(1, 1)), 2);
        let point = step("c", n(3, 3), None, 3);
        let w = ChainWitness { scheme: "t".into(), steps: vec![outer.clone(), inner.clone(), point.clone()] };
        verify_chain(&w, &[]).unwrap();

        // J_2 sits just right of the symbolic node's left end: missed
        let j = Interval::new(n(7, 4), n(1, 1)).unwrap();
        verify_chain(&w, &[None, None, Some(j.clone())]).unwrap();
        // J_1 meets the middle node
        assert!(verify_chain(&w, &[None, Some(j)]).is_err());

        let flat = ChainWitness { scheme: "t".into(), steps: vec![outer.clone(), step("b", n(1, 2), Some(n(1, 1)), 1)] };
        assert!(verify_chain(&flat, &[]).is_err());
        let same = ChainWitness { scheme: "t".into(), steps: vec![outer.clone(), step("b", n(0, 0), Some(n(1, 0)), 2)] };
        assert!(verify_chain(&same, &[]).is_err());
        assert!(verify_chain(&ChainWitness::default(), &[]).is_err());
    }

    #[test]
    fn symbolic_step_meets_only_through_left_end() {
        let s = step("x", n(1, 1), None, 1);
        assert!(s.meets(&Interval::new(n(1, 2), n(1, 1)).unwrap()));
        assert!(!s.meets(&Interval::new(n(5, 3), n(3, 2)).unwrap()));
        assert!(!s.meets(&Interval::new(n(0, 0), n(1, 2)).unwrap()));
    }
}
