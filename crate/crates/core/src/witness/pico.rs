//! Adversary for the picoscopic scheme with one budget index `N` withheld.
//!
//! The chain starts at a root of level `N` disjoint from every `J_k` with
//! `k < h(N)`: the `h(N)` roots are `2/13` apart and `|J_k| ≤ 1/13`, so each
//! budget meets at most one of them and `J_N = ∅` leaves a survivor. From a
//! node `I^i_j` the search descends into the children placed at step
//! `g(i, j)`, taking a child `I^g_c` disjoint from `J_k` for all
//! `k ≤ max(c, bound)`. When a branch dies out it backtracks, and when every
//! level-`N` root is exhausted it restarts from roots of other levels, as the
//! second case of the argument does. The search succeeds once a node misses
//! every placed budget; otherwise it reports inconclusive.
//!
//! Each descent logs the one-third count (children of the block met by the
//! budgets `J_L … J_(4^b−1)`) and the one-half count (budgets of `F({b})`
//! meeting the parent). Neither is trusted: the chain is checked directly.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::budget::BudgetList;
use crate::construct::pico::{h, pico_point, PicoNode, PicoRef, PicoScheme};
use crate::construct::spacing::{level_length, BASE};
use crate::cover::{greedy_cover, CoverProblem};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::witness::chain::{ChainStep, ChainWitness, WitnessOutcome};
use crate::witness::nano::Candidate;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentClaim {
    pub parent: PicoRef,
    pub child: PicoRef,
    pub block: u64,
    pub block_size: usize,
    /// Children of the block met by some `J_k`, `L ≤ k < 4^b`.
    pub third_hits: usize,
    /// `3·third_hits ≤ block_size`.
    pub third_ok: bool,
    /// Budgets `J_k`, `k ∈ F({b})`, meeting the parent.
    pub half_count: usize,
    /// Children of the block that qualify as the next chain node.
    pub survivors: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicoWitness {
    pub banned: usize,
    pub outcome: WitnessOutcome,
    /// Level of the root the chain starts from.
    pub start_level: Option<u32>,
    /// Roots of level `N` met by the budgets `J_k`, `k < h(N)`.
    pub root_hits: usize,
    pub claims: Vec<DescentClaim>,
    /// Nodes examined by the search.
    pub visited: usize,
}

/// `13^(−(k+1)!)`.
pub fn pico_budget(k: usize) -> crate::numeral::Numeral {
    level_length(k as u64)
}

/// Least `k` with `J_k` meeting `iv`, or `placed.len()`.
fn first_hit(iv: &Interval, placed: &[Option<Interval>]) -> usize {
    placed.iter().position(|j| j.as_ref().is_some_and(|j| j.intersects(iv))).unwrap_or(placed.len())
}

/// A node of index `j` with first hit `hit` qualifies above `bound` when it
/// misses `J_k` for all `k ≤ max(j, bound)`.
fn qualifies(hit: usize, j: u64, bound: usize, placed: &[Option<Interval>]) -> bool {
    hit == placed.len() || hit > (j as usize).max(bound)
}

struct Search<'a> {
    sch: &'a PicoScheme,
    placed: &'a [Option<Interval>],
    depth: usize,
    path: Vec<(&'a PicoNode, usize)>,
    best: Vec<(&'a PicoNode, usize)>,
    visited: usize,
}

impl<'a> Search<'a> {
    /// Extends `path` (ending in a qualifying node) to one that misses every
    /// budget, backtracking over children.
    fn extend(&mut self) -> bool {
        let (node, bound) = *self.path.last().expect("nonempty path");
        self.visited += 1;
        if self.path.len() > self.best.len() {
            self.best = self.path.clone();
        }
        if bound >= self.placed.len() {
            return true;
        }
        if self.path.len() >= self.depth {
            return false;
        }
        for c in self.sch.children(node) {
            let b = first_hit(&c.interval, self.placed);
            if qualifies(b, c.index, bound, self.placed) {
                self.path.push((c, b));
                if self.extend() {
                    return true;
                }
                self.path.pop();
            }
        }
        false
    }
}

fn claim(sch: &PicoScheme, placed: &[Option<Interval>], parent: &PicoNode, pbound: usize, child: &PicoNode) -> DescentClaim {
    let b = (0..32u64).find(|&b| child.index < 4u64.pow(b as u32 + 1)).expect("block");
    let (lo, hi) = (4u64.pow(b as u32) as usize, 4u64.pow(b as u32 + 1) as usize);
    let l = parent.scaffold_level.unwrap_or(0) as usize;
    let block: Vec<&PicoNode> = sch.children(parent).into_iter().filter(|c| (c.index as usize) >= lo && (c.index as usize) < hi).collect();
    let threats: Vec<&Interval> = placed.iter().enumerate().filter(|(k, _)| *k >= l && *k < lo).filter_map(|(_, j)| j.as_ref()).collect();
    let third_hits = block.iter().filter(|c| threats.iter().any(|j| j.intersects(&c.interval))).count();
    let half_count = placed
        .iter()
        .enumerate()
        .filter(|(k, _)| *k >= lo && *k < hi)
        .filter(|(_, j)| j.as_ref().is_some_and(|j| j.intersects(&parent.interval)))
        .count();
    let survivors = block.iter().filter(|c| qualifies(first_hit(&c.interval, placed), c.index, pbound, placed)).count();
    DescentClaim {
        parent: parent.key(),
        child: child.key(),
        block: b,
        block_size: block.len(),
        third_hits,
        third_ok: 3 * third_hits <= block.len(),
        half_count,
        survivors,
    }
}

fn chain_of(path: &[(&PicoNode, usize)]) -> ChainWitness {
    let steps = path.iter().map(|(v, b)| ChainStep::from_interval(v.label(), &v.interval, BigInt::from(*b))).collect();
    ChainWitness { scheme: "pico".into(), steps }
}

/// Searches for a chain of at most `depth` nodes ending in a node that
/// misses every placed budget. `placed[k]` is `J_k`; `placed[banned]` must be
/// empty.
pub fn pico_witness_chain(sch: &PicoScheme, placed: &[Option<Interval>], banned: usize, depth: usize) -> Result<PicoWitness> {
    if depth == 0 {
        return Err(Error::DepthLimit { depth, limit: usize::MAX });
    }
    if banned >= sch.params.root_levels as usize {
        return Err(Error::HorizonExceeded(format!("no roots of level {banned}")));
    }
    for (k, j) in placed.iter().enumerate() {
        let Some(j) = j else { continue };
        if k == banned {
            return Err(Error::Precondition(format!("J_{k} is placed but index {k} is withheld")));
        }
        if j.base() != BASE {
            return Err(Error::BaseMismatch(BASE, j.base()));
        }
        if j.length() > pico_budget(k) {
            return Err(Error::Precondition(format!("|J_{k}| exceeds (1/13)^(({k}+1)!)")));
        }
    }
    let n = banned as u32;
    let hn = h(n) as usize;
    let mut root_hits = BTreeSet::new();
    for j in placed.iter().take(hn).flatten() {
        let met: Vec<u64> = sch.roots(n).filter(|r| r.interval.intersects(j)).map(|r| r.index).collect();
        if met.len() > 1 {
            return Err(Error::Uncertified(format!("a budget meets {} roots of level {n}", met.len())));
        }
        root_hits.extend(met);
    }
    if root_hits.len() >= hn {
        return Err(Error::Uncertified(format!("all {hn} roots of level {n} are met")));
    }

    let mut order: Vec<&PicoNode> = sch.roots(n).collect();
    order.extend(sch.nodes().filter(|v| v.is_root() && v.level != n));
    let mut search = Search { sch, placed, depth, path: Vec::new(), best: Vec::new(), visited: 0 };
    let mut found = false;
    for r in order {
        let b = first_hit(&r.interval, placed);
        if !qualifies(b, r.index, 0, placed) {
            continue;
        }
        search.path = vec![(r, b)];
        if search.extend() {
            found = true;
            break;
        }
    }
    let path = if found { search.path.clone() } else { search.best.clone() };
    let claims = path.windows(2).map(|w| claim(sch, placed, w[0].0, w[0].1, w[1].0)).collect();
    let chain = chain_of(&path);
    let outcome = if found {
        WitnessOutcome::Defeated { chain }
    } else {
        WitnessOutcome::Inconclusive {
            reason: format!("no node within depth {depth} and the step horizon misses all {} budgets", placed.len()),
            partial: chain,
        }
    };
    Ok(PicoWitness {
        banned,
        outcome,
        start_level: path.first().map(|(v, _)| v.level),
        root_hits: root_hits.len(),
        claims,
        visited: search.visited,
    })
}

/// Whether some placed budget covers the added point `x = −1`.
pub fn covers_point(placed: &[Option<Interval>]) -> bool {
    let x = pico_point();
    placed.iter().flatten().any(|j| j.contains_point(&x))
}

/// Budgets `13^(−(k+1)!)`, `k < count`, with `banned` withheld.
pub fn pico_budgets(count: usize, banned: usize) -> Result<BudgetList> {
    BudgetList::new((0..count).map(pico_budget).collect(), BTreeSet::from([banned]))
}

/// Candidate covers with index `banned` withheld: greedy on a stage, budgets
/// aimed at the level-`banned` roots and their descendants, or random
/// placements on scheme nodes.
pub fn pico_candidates(sch: &PicoScheme, banned: usize, seed: u64, count: usize, budgets: usize) -> Result<Vec<Candidate>> {
    let list = pico_budgets(budgets, banned)?;
    let all: Vec<&PicoNode> = sch.nodes().collect();
    let stages: Vec<IntervalSet> =
        (0..sch.params.steps.max(1)).filter_map(|i| sch.pico_stage(i).ok().map(|s| s.set)).collect();
    let mut out = Vec::with_capacity(count);
    for t in 0..count as u64 {
        let s = seed.wrapping_add(t);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let place_on = |rng: &mut ChaCha8Rng, k: usize, v: &PicoNode| -> Result<Interval> {
            let len = &list.lengths[k];
            // left end within one budget length before the node
            let back = len.scale_small(rng.gen_range(0..=169)).shift(&BigInt::from(2));
            Interval::with_length(v.interval.lo() - &back, len)
        };
        let cand = match t % 3 {
            0 if !stages.is_empty() => {
                let d = rng.gen_range(0..stages.len());
                let p = CoverProblem::new(stages[d].clone(), list.clone())?;
                Candidate { seed: s, source: format!("greedy on stage {d}"), placed: greedy_cover(&p).placement }
            }
            1 => {
                // the adversary's best opening: one budget per level-N root,
                // the rest on their descendants
                let roots: Vec<&PicoNode> = sch.roots(banned as u32).collect();
                let mut targets: Vec<&PicoNode> = roots.clone();
                targets.shuffle(&mut rng);
                let deep: Vec<&PicoNode> =
                    all.iter().copied().filter(|v| roots.iter().any(|r| r.key() == v.root) && !v.is_root()).collect();
                let mut placed = vec![None; budgets];
                let mut next = 0;
                for (k, slot) in placed.iter_mut().enumerate() {
                    if k == banned {
                        continue;
                    }
                    let v = if next < targets.len() {
                        next += 1;
                        targets[next - 1]
                    } else if !deep.is_empty() {
                        deep[rng.gen_range(0..deep.len())]
                    } else {
                        all[rng.gen_range(0..all.len())]
                    };
                    *slot = Some(place_on(&mut rng, k, v)?);
                }
                Candidate { seed: s, source: format!("aimed at level-{banned} roots"), placed }
            }
            _ => {
                let mut placed = vec![None; budgets];
                for (k, slot) in placed.iter_mut().enumerate() {
                    if k != banned {
                        let v = all[rng.gen_range(0..all.len())];
                        *slot = Some(place_on(&mut rng, k, v)?);
                    }
                }
                Candidate { seed: s, source: "random on scheme nodes".into(), placed }
            }
        };
        out.push(cand);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::pico::PicoParams;
    use crate::numeral::Numeral;
    use crate::witness::chain::verify_chain;

    fn small() -> PicoScheme {
        PicoScheme::new(PicoParams { steps: 2, index_horizon: 64, root_levels: 3 }).unwrap()
    }

    #[test]
    fn empty_cover_takes_first_root() {
        let sch = small();
        let w = pico_witness_chain(&sch, &[], 1, 3).unwrap();
        assert!(w.outcome.is_defeated());
        assert_eq!(w.outcome.chain().steps[0].label, "I^1_0");
    }

    #[test]
    fn descends_past_a_root_budget() {
        // level-0 roots only; step 1 refines I^0_0 over F({1}) and I^0_1 over F({2})
        let sch = PicoScheme::new(PicoParams { steps: 2, index_horizon: 64, root_levels: 1 }).unwrap();
        let on = |key: PicoRef, k: usize| Some(Interval::with_length(sch.node(key).unwrap().interval.lo().clone(), &pico_budget(k)).unwrap());
        let mut placed: Vec<Option<Interval>> = vec![None; 8];
        placed[1] = on((0, 1), 1);
        placed[2] = on((0, 2), 2);
        placed[3] = on((0, 3), 3);
        placed[4] = on((1, 4), 4);
        let w = pico_witness_chain(&sch, &placed, 0, 3).unwrap();
        assert!(w.outcome.is_defeated());
        let labels: Vec<&str> = w.outcome.chain().steps.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["I^0_0", "I^1_5"]);
        assert_eq!(w.root_hits, 3);
        assert_eq!((w.claims[0].third_hits, w.claims[0].half_count, w.claims[0].survivors), (0, 1, 11));
        verify_chain(w.outcome.chain(), &placed).unwrap();
        assert!(!covers_point(&placed));
        placed[0] = Some(Interval::with_length(pico_point(), &pico_budget(0)).unwrap());
        assert!(covers_point(&placed));
    }

    #[test]
    fn withheld_index_must_be_empty() {
        let sch = small();
        let mut placed = vec![None; 3];
        placed[2] = Some(Interval::with_length(Numeral::from_int(13, 100).unwrap(), &pico_budget(2)).unwrap());
        assert!(matches!(pico_witness_chain(&sch, &placed, 2, 2), Err(Error::Precondition(_))));
        placed[2] = None;
        placed[1] = Some(Interval::with_length(Numeral::from_int(13, 100).unwrap(), &pico_budget(0)).unwrap());
        assert!(matches!(pico_witness_chain(&sch, &placed, 2, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn defeats_seeded_candidates() {
        let sch = small();
        for n in 0..3 {
            for c in pico_candidates(&sch, n, 7, 6, 16).unwrap() {
                assert!(!covers_point(&c.placed));
                let w = pico_witness_chain(&sch, &c.placed, n, 4).unwrap();
                assert!(w.outcome.is_defeated(), "N = {n}, {}: {:?}", c.source, w.outcome);
                verify_chain(w.outcome.chain(), &c.placed).unwrap();
            }
        }
    }
}
