//! Adversary for the 2-nanoscopic scheme at `ε = 1/4`.
//!
//! From `K_n = I_j`, disjoint from `J_i` for `i < f(j)`, only the budgets
//! `J_(f(j))`, …, `J_(2^(j+1)−1)` threaten the children of `I_j`. Each is
//! shorter than the gap between children, so it meets at most one of them,
//! leaving at least `f(j)` survivors; the survivor of smallest index is
//! `K_(n+1)`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::budget::BudgetList;
use crate::construct::nano::{nano_f, NanoNode, NanoScheme};
use crate::cover::{counting_certificate, greedy_cover, solve_feasible, CoverProblem};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::numeral::Numeral;
use crate::witness::chain::{ChainStep, ChainWitness};

/// Longest chain the nano adversary will build (`K_0 … K_3`).
pub const MAX_CHAIN_DEPTH: usize = 4;

/// `(1/4)^(2^k) = 2^(−2^(k+1))`.
pub fn quarter_budget(k: usize) -> Numeral {
    Numeral::from_power(2, BigInt::one() << (k + 1)).expect("base 2")
}

fn step_of(n: &NanoNode) -> ChainStep {
    let label = format!(
        "I_{} (path {})",
        n.index(),
        n.node.path().iter().map(|k| k.to_string()).collect::<Vec<_>>().join("/")
    );
    ChainStep { label, lo: n.lo.clone(), hi: n.length().map(|len| &n.lo + &len), bound: nano_f(n.index()) }
}

/// Builds `K_0 ⊃ … ⊃ K_(depth−1)` avoiding `placed`, where `placed[k]` is
/// `J_k` (or `None` when unused).
pub fn nano_witness_chain(sch: &NanoScheme, placed: &[Option<Interval>], depth: usize) -> Result<ChainWitness> {
    if depth == 0 || depth > MAX_CHAIN_DEPTH {
        return Err(Error::DepthLimit { depth, limit: MAX_CHAIN_DEPTH });
    }
    for (k, j) in placed.iter().enumerate() {
        if let Some(j) = j {
            if j.base() != 2 {
                return Err(Error::BaseMismatch(2, j.base()));
            }
            if j.length() >= quarter_budget(k) {
                return Err(Error::Precondition(format!("|J_{k}| is not below (1/4)^(2^{k})")));
            }
        }
    }
    let mut steps = Vec::with_capacity(depth);
    let mut cur: Option<NanoNode> = None;
    for _ in 0..depth {
        let (first, end) = match &cur {
            None => (BigInt::zero(), BigInt::from(2)),
            Some(p) => {
                let e = u64::try_from(p.index() + 1u32).map_err(|_| Error::HorizonExceeded("child count".into()))?;
                (BigInt::one() << e, BigInt::one() << (e + 1))
            }
        };
        // threatening budgets: [f(j), 2^(j+1)), or [0, 1) at the ambient
        let (lo_i, hi_i, need) = match &cur {
            None => (BigInt::zero(), BigInt::one(), BigInt::one()),
            Some(p) => {
                let f = nano_f(p.index());
                (f.clone(), first.clone(), f)
            }
        };
        let mut hit: Vec<BigInt> = Vec::new();
        for (i, j) in placed.iter().enumerate() {
            let i_big = BigInt::from(i);
            if i_big < lo_i || i_big >= hi_i {
                continue;
            }
            let Some(j) = j else { continue };
            let meets = sch.children_meeting(cur.as_ref(), j, 2)?;
            if meets.len() > 1 {
                return Err(Error::Uncertified(format!("J_{i} meets two children of the current node")));
            }
            hit.extend(meets);
        }
        hit.sort();
        hit.dedup();
        let survivors = &end - &first - BigInt::from(hit.len());
        if survivors < need {
            return Err(Error::Uncertified(format!("only {survivors} surviving children, expected at least {need}")));
        }
        // smallest index not hit
        let mut k = first;
        for h in &hit {
            if *h == k {
                k += 1;
            } else if *h > k {
                break;
            }
        }
        let next = sch.child_of(cur.as_ref(), &k)?;
        steps.push(step_of(&next));
        cur = Some(next);
    }
    Ok(ChainWitness { scheme: "nano".into(), steps })
}

/// A seeded adversarial cover attempt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub seed: u64,
    pub source: String,
    pub placed: Vec<Option<Interval>>,
}

/// `(1/4)^(2^k)·(1 − 2^(−8))`: strictly below the budget, as the adversary
/// argument requires.
pub fn shrunk_quarter_budgets(count: usize) -> Result<BudgetList> {
    let lens = (0..count)
        .map(|k| {
            let b = quarter_budget(k);
            &b - &b.shift(&BigInt::from(8))
        })
        .collect();
    BudgetList::new(lens, Default::default())
}

/// Candidate covers of nano stage sets: greedy on a whole stage, the exact
/// solver on a few stage components, or random placements near components.
pub fn nano_candidates(sch: &NanoScheme, seed: u64, count: usize, budgets: usize) -> Result<Vec<Candidate>> {
    let stages: Vec<IntervalSet> = (0..=2).map(|d| sch.nano_stage(d).map(|s| s.set)).collect::<Result<_>>()?;
    let list = shrunk_quarter_budgets(budgets)?;
    let mut out = Vec::with_capacity(count);
    for t in 0..count as u64 {
        let s = seed.wrapping_add(t);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let d = rng.gen_range(0..=2usize);
        let stage = &stages[d];
        let cand = match t % 3 {
            0 => {
                let p = CoverProblem::new(stage.clone(), list.clone())?;
                Candidate { seed: s, source: format!("greedy on stage {d}"), placed: greedy_cover(&p).placement }
            }
            1 => {
                let size = rng.gen_range(1..=3usize).min(stage.len());
                let mut comps: Vec<Interval> = stage.intervals().to_vec();
                comps.shuffle(&mut rng);
                comps.truncate(size);
                let sub = IntervalSet::normalize_union(2, comps)?;
                let p = CoverProblem::new(sub, list.clone())?;
                let v = match counting_certificate(&p) {
                    Some(_) => None,
                    None => Some(solve_feasible(&p)?).filter(|v| v.feasible),
                };
                let (placed, how) = match v {
                    Some(v) => (v.placement, "solver"),
                    None => (greedy_cover(&p).placement, "greedy"),
                };
                Candidate { seed: s, source: format!("{how} on {size} components of stage {d}"), placed }
            }
            _ => {
                let mut placed = Vec::with_capacity(budgets);
                for k in 0..budgets {
                    let c = &stage.intervals()[rng.gen_range(0..stage.len())];
                    let len = &list.lengths[k];
                    // left end within one budget length before the component
                    let back = len.scale_small(rng.gen_range(0..=64)).shift(&BigInt::from(6));
                    placed.push(Some(Interval::with_length(c.lo() - &back, len)?));
                }
                Candidate { seed: s, source: format!("random near stage {d}"), placed }
            }
        };
        out.push(cand);
    }
    Ok(out)
}
