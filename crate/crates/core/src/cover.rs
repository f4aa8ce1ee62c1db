//! Exact cover feasibility: can a finite interval set be covered by closed
//! intervals whose lengths are bounded by a list of budgets?
//!
//! Any feasible cover can be left-normalized: sort the used intervals by left
//! endpoint and slide each one right until its left end sits on the leftmost
//! target point not covered by its predecessors. Sliding right never uncovers
//! a point that the interval was needed for, so it suffices to search over the
//! order in which budgets are spent. The dynamic program keeps, for each subset
//! of spent budgets, the furthest frontier `f` such that the target is covered
//! up to `f`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{budget_length, BudgetList, EpsilonSpec, PowerFamily};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::numeral::Numeral;

pub const DEFAULT_BUDGET_LIMIT: usize = 22;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverProblem {
    pub target: IntervalSet,
    pub budgets: BudgetList,
}

impl CoverProblem {
    pub fn new(target: IntervalSet, budgets: BudgetList) -> Result<Self> {
        if let Some(l) = budgets.lengths.first() {
            if l.base() != target.base() && !target.is_empty() {
                return Err(Error::BaseMismatch(target.base(), l.base()));
            }
        }
        Ok(CoverProblem { target, budgets })
    }
}

/// Evidence that no cover exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// Every subset of budgets was exhausted by the dynamic program.
    SubsetDpExhaustion { states: usize },
    /// Per-budget bounds on how many components one interval can meet sum to
    /// fewer than the number of components.
    Counting { hit_bounds: Vec<usize>, total: usize, components: usize },
    /// Total budget length is below the target measure.
    Measure { budget_sum: Numeral, target_measure: Numeral },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverVerdict {
    pub feasible: bool,
    /// Placed interval per budget index (`None` when unused or banned).
    pub placement: Vec<Option<Interval>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

impl CoverVerdict {
    fn feasible(placement: Vec<Option<Interval>>) -> Self {
        CoverVerdict { feasible: true, placement, certificate: None }
    }

    fn infeasible(n: usize, certificate: Option<Certificate>) -> Self {
        CoverVerdict { feasible: false, placement: vec![None; n], certificate }
    }

    pub fn placed(&self) -> impl Iterator<Item = (usize, &Interval)> {
        self.placement.iter().enumerate().filter_map(|(i, p)| p.as_ref().map(|iv| (i, iv)))
    }
}

/// Leftmost target point not yet covered when everything up to `frontier`
/// is covered; `None` once the target is exhausted.
fn next_uncovered(target: &IntervalSet, frontier: Option<&Numeral>) -> Option<Numeral> {
    let comps = target.intervals();
    match frontier {
        None => comps.first().map(|c| c.lo().clone()),
        Some(f) => {
            let idx = comps.partition_point(|c| c.hi() <= f);
            let c = comps.get(idx)?;
            if c.lo() > f {
                Some(c.lo().clone())
            } else {
                Some(f.clone())
            }
        }
    }
}

/// Exact decision by subset dynamic program over usable budgets.
pub fn solve_feasible(p: &CoverProblem) -> Result<CoverVerdict> {
    solve_feasible_with_limit(p, DEFAULT_BUDGET_LIMIT)
}

pub fn solve_feasible_with_limit(p: &CoverProblem, limit: usize) -> Result<CoverVerdict> {
    let n = p.budgets.len();
    let usable: Vec<usize> = p.budgets.usable().collect();
    if usable.len() > limit {
        return Err(Error::BudgetLimit { count: usable.len(), limit });
    }
    if p.target.is_empty() {
        return Ok(CoverVerdict::feasible(vec![None; n]));
    }
    let u = usable.len();
    let lens: Vec<&Numeral> = usable.iter().map(|&i| &p.budgets.lengths[i]).collect();

    // best[mask] = (frontier reached, last budget slot, left end of that placement)
    type State = Option<(Numeral, usize, Numeral)>;
    let full = 1usize << u;
    let mut best: Vec<State> = vec![None; full];
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); u + 1];
    for mask in 1..full {
        layers[mask.count_ones() as usize].push(mask);
    }

    let mut states = 1usize;
    for layer in layers.iter().skip(1) {
        let computed: Vec<State> = layer
            .par_iter()
            .map(|&mask| {
                let mut pick: State = None;
                for slot in 0..u {
                    let bit = 1usize << slot;
                    if mask & bit == 0 {
                        continue;
                    }
                    let prev = mask ^ bit;
                    let frontier = match (prev, &best[prev]) {
                        (0, _) => None,
                        (_, Some(st)) => Some(&st.0),
                        (_, None) => continue,
                    };
                    let Some(x) = next_uncovered(&p.target, frontier) else {
                        continue;
                    };
                    let reach = &x + lens[slot];
                    if pick.as_ref().is_none_or(|cur| reach > cur.0) {
                        pick = Some((reach, slot, x));
                    }
                }
                pick
            })
            .collect();
        for (&mask, st) in layer.iter().zip(computed) {
            states += st.is_some() as usize;
            best[mask] = st;
        }
        // fewest budgets first, then smallest mask
        let finished = layer
            .iter()
            .find(|&&m| best[m].as_ref().is_some_and(|s| next_uncovered(&p.target, Some(&s.0)).is_none()));
        if let Some(&mask) = finished {
            let mut placement = vec![None; n];
            let mut m = mask;
            while m != 0 {
                let (hi, slot, lo) = best[m].clone().expect("reached state");
                placement[usable[slot]] = Some(Interval::new(lo, hi)?);
                m ^= 1 << slot;
            }
            return Ok(CoverVerdict::feasible(placement));
        }
    }
    Ok(CoverVerdict::infeasible(n, Some(Certificate::SubsetDpExhaustion { states })))
}

/// Longest remaining budget at the leftmost uncovered point. Heuristic:
/// may miss feasible instances, never reports a false cover.
pub fn greedy_cover(p: &CoverProblem) -> CoverVerdict {
    let n = p.budgets.len();
    let mut order: Vec<usize> = p.budgets.usable().collect();
    order.sort_by(|&a, &b| {
        p.budgets.lengths[b]
            .partial_cmp(&p.budgets.lengths[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut placement = vec![None; n];
    let mut frontier: Option<Numeral> = None;
    for i in order {
        let x = match next_uncovered(&p.target, frontier.as_ref()) {
            Some(x) => x,
            None => break,
        };
        let iv = Interval::with_length(x, &p.budgets.lengths[i]).expect("positive length");
        frontier = Some(iv.hi().clone());
        placement[i] = Some(iv);
    }
    if next_uncovered(&p.target, frontier.as_ref()).is_none() {
        CoverVerdict::feasible(placement)
    } else {
        CoverVerdict { feasible: false, placement, certificate: None }
    }
}

/// Pigeonhole and measure bounds; `Some` only when infeasibility is certain.
pub fn counting_certificate(p: &CoverProblem) -> Option<Certificate> {
    let components = p.target.len();
    if components == 0 {
        return None;
    }
    let hit_bounds: Vec<usize> = p
        .budgets
        .usable()
        .map(|i| p.target.max_hit_count(&p.budgets.lengths[i]))
        .collect();
    let total: usize = hit_bounds.iter().sum();
    if total < components {
        return Some(Certificate::Counting { hit_bounds, total, components });
    }
    let budget_sum = p
        .budgets
        .usable()
        .fold(Numeral::zero(p.target.base()).expect("valid base"), |acc, i| &acc + &p.budgets.lengths[i]);
    let target_measure = p.target.measure();
    if budget_sum < target_measure {
        return Some(Certificate::Measure { budget_sum, target_measure });
    }
    None
}

/// Independent check of a claimed cover against a problem.
pub fn validate_cover(p: &CoverProblem, placement: &[Option<Interval>]) -> Result<()> {
    if placement.len() != p.budgets.len() {
        return Err(Error::InvalidCover(format!(
            "placement has {} slots for {} budgets",
            placement.len(),
            p.budgets.len()
        )));
    }
    let mut used = Vec::new();
    for (i, slot) in placement.iter().enumerate() {
        if let Some(iv) = slot {
            if p.budgets.is_banned(i) {
                return Err(Error::InvalidCover(format!("banned index {i} used")));
            }
            if iv.length() > p.budgets.lengths[i] {
                return Err(Error::InvalidCover(format!("interval {i} exceeds its budget")));
            }
            used.push(iv.clone());
        }
    }
    let union = IntervalSet::normalize_union(p.target.base(), used)?;
    if !union.covers(&p.target) {
        return Err(Error::InvalidCover("union does not contain the target".into()));
    }
    Ok(())
}

/// A cover whose intervals carry family indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCover {
    pub entries: Vec<LabeledInterval>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledInterval {
    pub index: u64,
    pub interval: Interval,
}

impl LabeledCover {
    pub fn push(&mut self, index: u64, interval: Interval) {
        self.entries.push(LabeledInterval { index, interval });
    }

    pub fn indices(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.index).collect()
    }

    pub fn union(&self, base: u32) -> Result<IntervalSet> {
        IntervalSet::normalize_union(base, self.entries.iter().map(|e| e.interval.clone()).collect())
    }

    pub fn sort(&mut self) {
        self.entries.sort_by_key(|e| e.index);
    }
}

/// Universal validator: distinct indices, each length within `f_index(ε)`,
/// union containing `target`.
pub fn validate_labeled(target: &IntervalSet, fam: &PowerFamily, eps: &EpsilonSpec, cover: &LabeledCover) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for e in &cover.entries {
        if !seen.insert(e.index) {
            return Err(Error::InvalidCover(format!("index {} used twice", e.index)));
        }
        let budget = budget_length(fam, e.index, eps)?;
        if e.interval.length() > budget {
            return Err(Error::InvalidCover(format!("interval at index {} exceeds f_{}(ε)", e.index, e.index)));
        }
    }
    let union = cover.union(target.base())?;
    if !union.covers(target) {
        return Err(Error::InvalidCover("labeled cover misses part of the target".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: i64) -> Numeral {
        Numeral::from_int(2, v).unwrap()
    }

    fn p(e: i64) -> Numeral {
        Numeral::from_power(2, e).unwrap()
    }

    fn iv(a: Numeral, b: Numeral) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn problem(comps: Vec<Interval>, lens: Vec<Numeral>) -> CoverProblem {
        CoverProblem::new(
            IntervalSet::normalize_union(2, comps).unwrap(),
            BudgetList::new(lens, Default::default()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn greedy_fails_dp_succeeds() {
        let pr = problem(vec![iv(n(0), p(4)), iv(n(5), n(7))], vec![n(2), p(1)]);
        let v = solve_feasible(&pr).unwrap();
        assert!(v.feasible);
        validate_cover(&pr, &v.placement).unwrap();
        assert_eq!(v.placement[1].as_ref().unwrap().lo(), &n(0));
        assert_eq!(v.placement[0].as_ref().unwrap().lo(), &n(5));
        assert!(!greedy_cover(&pr).feasible);
        assert_eq!(counting_certificate(&pr), None);
    }

    #[test]
    fn empty_target_is_feasible() {
        let pr = problem(vec![], vec![n(1)]);
        let v = solve_feasible(&pr).unwrap();
        assert!(v.feasible);
        assert!(v.placed().next().is_none());
    }

    #[test]
    fn three_far_components_two_units() {
        let pr = problem(vec![iv(n(0), n(1)), iv(n(4), n(5)), iv(n(8), n(9))], vec![n(1), n(1)]);
        let v = solve_feasible(&pr).unwrap();
        assert!(!v.feasible);
        assert!(matches!(v.certificate, Some(Certificate::SubsetDpExhaustion { .. })));
        match counting_certificate(&pr) {
            Some(Certificate::Counting { total, components, .. }) => assert_eq!((total, components), (2, 3)),
            other => panic!("expected counting certificate, got {other:?}"),
        }
    }

    #[test]
    fn measure_certificate() {
        let pr = problem(vec![iv(n(0), n(2))], vec![p(1), p(1)]);
        assert!(matches!(counting_certificate(&pr), Some(Certificate::Measure { .. })));
        assert!(!solve_feasible(&pr).unwrap().feasible);
    }

    #[test]
    fn greedy_examples() {
        let pr = problem(vec![iv(n(0), p(2))], vec![n(1)]);
        assert!(greedy_cover(&pr).feasible);
        // stage-0 nano set with nano budgets at ε = 1/2
        let three_q = &p(1) + &p(2);
        let pr = problem(vec![iv(n(0), p(2)), iv(p(1), three_q)], vec![p(1), p(2)]);
        let g = greedy_cover(&pr);
        assert!(g.feasible);
        validate_cover(&pr, &g.placement).unwrap();
    }

    #[test]
    fn banned_index_is_skipped() {
        let comps = vec![iv(n(0), n(1))];
        let pr = CoverProblem::new(
            IntervalSet::normalize_union(2, comps).unwrap(),
            BudgetList::new(vec![n(1), p(1)], [0].into()).unwrap(),
        )
        .unwrap();
        assert!(!solve_feasible(&pr).unwrap().feasible);
        let bad = vec![Some(iv(n(0), n(1))), None];
        assert!(validate_cover(&pr, &bad).is_err());
    }

    #[test]
    fn budget_limit_enforced() {
        let pr = problem(vec![iv(n(0), n(1))], vec![p(1); 5]);
        assert!(matches!(solve_feasible_with_limit(&pr, 4), Err(Error::BudgetLimit { .. })));
    }

    #[test]
    fn duplicate_budgets_handled() {
        let pr = problem(vec![iv(n(0), n(1)), iv(n(3), n(4))], vec![n(1), n(1)]);
        let v = solve_feasible(&pr).unwrap();
        assert!(v.feasible);
        validate_cover(&pr, &v.placement).unwrap();
    }

    #[test]
    fn left_normalization_shift_right() {
        // a cover placed anywhere can be slid to start at the leftmost uncovered point
        let comps = vec![iv(n(1), n(2)), iv(n(3), n(4))];
        let pr = problem(comps, vec![n(4)]);
        let arbitrary = vec![Some(iv(p(1), &p(1) + &n(4)))];
        validate_cover(&pr, &arbitrary).unwrap();
        let v = solve_feasible(&pr).unwrap();
        assert_eq!(v.placement[0].as_ref().unwrap().lo(), &n(1));
        validate_cover(&pr, &v.placement).unwrap();
    }

    #[test]
    fn labeled_validator() {
        let eps = EpsilonSpec::new(2, 1).unwrap();
        let fam = PowerFamily::nano();
        let target = IntervalSet::normalize_union(2, vec![iv(n(0), p(2))]).unwrap();
        let mut c = LabeledCover::default();
        c.push(1, iv(n(0), p(2)));
        validate_labeled(&target, &fam, &eps, &c).unwrap();
        c.push(1, iv(n(0), p(3)));
        assert!(validate_labeled(&target, &fam, &eps, &c).is_err());
        let mut c = LabeledCover::default();
        c.push(2, iv(n(0), p(2)));
        assert!(validate_labeled(&target, &fam, &eps, &c).is_err());
    }
}
