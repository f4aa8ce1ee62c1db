//! Adding a countable point set `B` to a covered set `A`.
//!
//! Case 1: `A` comes as compact pieces `A_0, A_1, …`. Index `s_i` is kept
//! for `b_i` and piece `A_i` is pushed past it with [`compact_shift`].
//!
//! Case 2 (nanoscopic): `A` comes as rows `(I^n_k)_k` with
//! `|I^n_k| ≤ 2^(−2^(n+k))`. For `ε = 2^(−t)` take the least `n` with
//! `2^n > t`, then `k`, `m > n` and `T = {t_0, t_1, …}` with `I^m_j ⊂ I^n_k`
//! for `j ∈ T`. The cover is `K_0 = I^n_k`, `K_(j+1) = I^m_j` for `j ∉ T` and
//! `K_(t_i+1) ∋ b_i` with `|K_(t_i+1)| = 2^(−2^(m+t_i))`.
//!
//! Which case holds is not decidable from finite data, so the input says,
//! and only the finite consequences of that claim are checked.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{around, compact_shift, StageSource, CoverSource};
use crate::budget::{budget_length, EpsilonSpec, PowerFamily};
use crate::construct::rational::{rational_cover_stage, GdeltaRationalScheme};
use crate::cover::{validate_labeled, LabeledCover};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::numeral::Numeral;

/// Rows `(I^n_k)_k` of nano covers at `ε = 2^(−2^n)`, base 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestedRows {
    pub rows: Vec<Vec<Interval>>,
}

impl NestedRows {
    pub fn new(rows: Vec<Vec<Interval>>) -> Result<Self> {
        let fam = PowerFamily::nano();
        for (n, row) in rows.iter().enumerate() {
            let eps = EpsilonSpec::new(2, BigInt::one() << n)?;
            for (k, iv) in row.iter().enumerate() {
                if iv.base() != 2 {
                    return Err(Error::BaseMismatch(2, iv.base()));
                }
                if iv.length() > budget_length(&fam, k as u64, &eps)? {
                    return Err(Error::Precondition(format!("|I^{n}_{k}| exceeds 2^(−2^({n}+{k}))")));
                }
            }
        }
        Ok(NestedRows { rows })
    }

    /// Row `n` is `P_(2^(2^n) − 1)` of the rational `G_δ` set, first `cols` intervals.
    pub fn rational(rows: u32, cols: u64) -> Result<Self> {
        if rows > 6 {
            return Err(Error::HorizonExceeded(format!("{rows} rational rows")));
        }
        let sch = GdeltaRationalScheme::new(PowerFamily::nano(), 2)?;
        let rows = (0..rows)
            .map(|n| {
                let d = 1u64 << (1u64 << n);
                let st = rational_cover_stage(&sch, d - 1, cols)?;
                Ok(st.into_iter().map(|r| r.interval).collect())
            })
            .collect::<Result<_>>()?;
        NestedRows::new(rows)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeInput {
    Case1 { pieces: Vec<StageSource>, fam: PowerFamily },
    Case2 { rows: NestedRows },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeCase {
    One,
    Two,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case2Book {
    pub n: u64,
    pub k: u64,
    pub m: u64,
    pub t: Vec<u64>,
    /// `ε_i = 2^(−eps_exps[i])`.
    #[serde(with = "crate::serde_big::vec")]
    pub eps_exps: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergePlan {
    pub case: MergeCase,
    /// Case 1: `s_i`, the index holding `b_i`.
    pub reserved: Vec<u64>,
    pub case2: Option<Case2Book>,
    pub target: IntervalSet,
    pub cover: LabeledCover,
}

pub fn smz_merge(input: &MergeInput, points: &[Numeral], eps: &EpsilonSpec) -> Result<MergePlan> {
    if let Some(p) = points.iter().find(|p| p.base() != eps.base) {
        return Err(Error::BaseMismatch(eps.base, p.base()));
    }
    match input {
        MergeInput::Case1 { pieces, fam } => case1(pieces, fam, points, eps),
        MergeInput::Case2 { rows } => case2(rows, points, eps),
    }
}

fn point_set(base: u32, points: &[Numeral]) -> Result<IntervalSet> {
    IntervalSet::normalize_union(base, points.iter().cloned().map(Interval::point).collect())
}

fn case1(pieces: &[StageSource], fam: &PowerFamily, points: &[Numeral], eps: &EpsilonSpec) -> Result<MergePlan> {
    let mut cover = LabeledCover::default();
    let mut reserved = Vec::with_capacity(points.len());
    let mut target = point_set(eps.base, points)?;
    let mut last: Option<u64> = None;
    for i in 0..pieces.len().max(points.len()) {
        if let Some(b) = points.get(i) {
            let s = last.map_or(0, |l| l + 1);
            cover.push(s, around(b, &budget_length(fam, s, eps)?)?);
            reserved.push(s);
            last = Some(s);
        }
        if let Some(piece) = pieces.get(i) {
            if piece.base() != eps.base {
                return Err(Error::BaseMismatch(eps.base, piece.base()));
            }
            let r = compact_shift(piece, fam, last.unwrap_or(0), eps)?;
            last = r.cover.entries.iter().map(|e| e.index).max().or(last);
            cover.entries.extend(r.cover.entries);
            target = target.union(&piece.target()?)?;
        }
    }
    cover.sort();
    validate_labeled(&target, fam, eps, &cover)?;
    Ok(MergePlan { case: MergeCase::One, reserved, case2: None, target, cover })
}

fn case2(rows: &NestedRows, points: &[Numeral], eps: &EpsilonSpec) -> Result<MergePlan> {
    if eps.base != 2 {
        return Err(Error::BaseMismatch(2, eps.base));
    }
    let mut n = 0u64;
    while BigInt::one() << n <= eps.t {
        n += 1;
    }
    let rs = &rows.rows;
    if rs.len() as u64 <= n + 1 {
        return Err(Error::Uncertified(format!("Case 2 needs rows beyond {n}, only {} given", rs.len())));
    }
    let need = points.len();
    let mut found = None;
    'search: for m in n as usize + 1..rs.len() {
        for (k, outer) in rs[n as usize].iter().enumerate() {
            let inside: Vec<u64> =
                rs[m].iter().enumerate().filter(|(_, iv)| outer.contains(iv)).map(|(j, _)| j as u64).collect();
            if inside.len() >= need {
                found = Some((k as u64, m as u64, inside[..need].to_vec()));
                break 'search;
            }
        }
    }
    let Some((k, m, t)) = found else {
        return Err(Error::Uncertified(format!("no I^{n}_k contains {need} intervals of a later row")));
    };

    let mut cover = LabeledCover::default();
    cover.push(0, rs[n as usize][k as usize].clone());
    for (j, iv) in rs[m as usize].iter().enumerate() {
        if !t.contains(&(j as u64)) {
            cover.push(j as u64 + 1, iv.clone());
        }
    }
    let mut eps_exps = Vec::with_capacity(need);
    for (b, &ti) in points.iter().zip(&t) {
        let e = BigInt::one() << (m + ti);
        cover.push(ti + 1, around(b, &Numeral::from_power(2, e.clone())?)?);
        eps_exps.push(e);
    }
    cover.sort();
    let target = IntervalSet::normalize_union(2, rs[m as usize].clone())?.union(&point_set(2, points)?)?;
    validate_labeled(&target, &PowerFamily::nano(), eps, &cover)?;
    Ok(MergePlan {
        case: MergeCase::Two,
        reserved: Vec::new(),
        case2: Some(Case2Book { n, k, m, t, eps_exps }),
        target,
        cover,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::nano::NanoScheme;

    fn int(v: i64) -> Numeral {
        Numeral::from_int(2, v).unwrap()
    }

    fn half() -> EpsilonSpec {
        EpsilonSpec::new(2, 1).unwrap()
    }

    #[test]
    fn case2_point_far_left() {
        let rows = NestedRows::rational(3, 8).unwrap();
        let plan = smz_merge(&MergeInput::Case2 { rows }, &[int(-5)], &half()).unwrap();
        let book = plan.case2.unwrap();
        assert_eq!((book.n, book.k, book.m, book.t.clone()), (1, 0, 2, vec![0]));
        let slot = plan.cover.entries.iter().find(|e| e.index == 1).unwrap();
        assert!(slot.interval.contains_point(&int(-5)));
    }

    #[test]
    fn case2_without_points() {
        let rows = NestedRows::rational(3, 8).unwrap();
        let plan = smz_merge(&MergeInput::Case2 { rows: rows.clone() }, &[], &half()).unwrap();
        // K_0 = I^1_0 and K_(j+1) = I^2_j
        assert_eq!(plan.cover.entries[0].interval, rows.rows[1][0]);
        for e in &plan.cover.entries[1..] {
            assert_eq!(e.interval, rows.rows[2][e.index as usize - 1]);
        }
    }

    #[test]
    fn case2_needs_containment() {
        let rows = NestedRows::rational(3, 8).unwrap();
        let pts = [int(-5), int(7)];
        assert!(matches!(smz_merge(&MergeInput::Case2 { rows }, &pts, &half()), Err(Error::Uncertified(_))));
    }

    #[test]
    fn case1_reserves_slots() {
        let piece = StageSource::nano(&NanoScheme::default(), 2).unwrap();
        let fam = crate::budget::shift_family(&PowerFamily::nano(), 2).unwrap();
        let input = MergeInput::Case1 { pieces: vec![piece], fam };
        let pts = [int(-5), int(3), int(9)];
        let plan = smz_merge(&input, &pts, &half()).unwrap();
        assert_eq!(plan.reserved.len(), 3);
        for (s, b) in plan.reserved.iter().zip(&pts) {
            let e = plan.cover.entries.iter().find(|e| e.index == *s).unwrap();
            assert!(e.interval.contains_point(b));
        }
        assert!(plan.reserved.windows(2).all(|w| w[0] < w[1]));
    }
}
