#![allow(dead_code)]

use microsets::{BudgetList, CoverProblem, Interval, IntervalSet, Numeral};
use rand::Rng;

pub fn dyadic(quarters: i64) -> Numeral {
    // quarters / 4 in base 2
    let whole = Numeral::from_int(2, quarters).unwrap();
    whole.shift(&2.into())
}

/// Random small instance: up to `max_comps` components and `max_budgets`
/// budgets, all endpoints on the quarter grid.
pub fn random_instance<R: Rng>(rng: &mut R, max_comps: usize, max_budgets: usize) -> CoverProblem {
    let comps = rng.gen_range(0..=max_comps);
    let mut raw = Vec::new();
    for _ in 0..comps {
        let lo = rng.gen_range(0..64);
        let len = rng.gen_range(0..8);
        raw.push(Interval::new(dyadic(lo), dyadic(lo + len)).unwrap());
    }
    let target = IntervalSet::normalize_union(2, raw).unwrap();
    let nb = rng.gen_range(1..=max_budgets);
    let lens = (0..nb).map(|_| dyadic(rng.gen_range(1..20))).collect();
    CoverProblem::new(target, BudgetList::new(lens, Default::default()).unwrap()).unwrap()
}

/// Exhaustive search over every order of spending budgets, each placed with
/// its left end at the leftmost uncovered target point.
pub fn brute_force_feasible(p: &CoverProblem) -> bool {
    fn uncovered(target: &IntervalSet, f: Option<&Numeral>) -> Option<Numeral> {
        for c in target.intervals() {
            match f {
                None => return Some(c.lo().clone()),
                Some(f) if c.hi() > f => return Some(if c.lo() > f { c.lo().clone() } else { f.clone() }),
                _ => {}
            }
        }
        None
    }
    fn go(p: &CoverProblem, used: &mut Vec<bool>, f: Option<Numeral>) -> bool {
        let Some(x) = uncovered(&p.target, f.as_ref()) else {
            return true;
        };
        for i in 0..p.budgets.len() {
            if used[i] || p.budgets.is_banned(i) {
                continue;
            }
            used[i] = true;
            let reach = &x + &p.budgets.lengths[i];
            let ok = go(p, used, Some(reach));
            used[i] = false;
            if ok {
                return true;
            }
        }
        false
    }
    let mut used = vec![false; p.budgets.len()];
    go(p, &mut used, None)
}

/// Independent evaluation of a numeral as a big rational, digit by digit.
pub fn rational_value(n: &Numeral) -> num_rational::BigRational {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Zero;
    let b = BigRational::from_integer(BigInt::from(n.base()));
    let mut acc = BigRational::zero();
    for r in n.runs() {
        let lo: i64 = r.lo.clone().try_into().unwrap();
        let hi: i64 = r.hi.clone().try_into().unwrap();
        for e in lo..=hi {
            let p = if e >= 0 { b.pow(-(e as i32)) } else { b.pow((-e) as i32) };
            acc += p * BigRational::from_integer(BigInt::from(r.digit));
        }
    }
    acc * BigRational::from_integer(BigInt::from(n.sign()))
}
