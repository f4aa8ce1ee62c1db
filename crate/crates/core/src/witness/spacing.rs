//! Exact checks of the three spacing conditions.

use serde::Serialize;

use crate::construct::spacing::{block_set, f_set, level_length, placed_exponent, pow13, SpacingScheme};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThirdCheck {
    pub b: u64,
    pub block_size: usize,
    /// `(k, most placements of F({b}) one interval of length 13^(−(k+1)!) meets)`
    pub hits_per_level: Vec<(u64, usize)>,
    pub total: usize,
    /// `total ≤ block_size / 3`: no sequence covers more than a third.
    pub passes: bool,
    /// `total < block_size / 3`, the analytic envelope of the geometric series.
    pub strict: bool,
    /// `Σ_{L≤k<4^b} block_size / 6^(k−L+1)`, rounded down.
    pub envelope: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpacingReport {
    /// Indices whose length differs from `13^(−(m+1)!(k+1)!)`.
    pub length_failures: Vec<u64>,
    /// Pairs closer than `13^(−(min+1)!)`.
    pub distance_failures: Vec<(u64, u64)>,
    pub thirds: Vec<ThirdCheck>,
    pub lengths_ok: bool,
    pub distances_ok: bool,
    pub thirds_ok: bool,
    pub passed: bool,
}

pub fn spacing_condition_check(sch: &SpacingScheme) -> SpacingReport {
    let length_failures: Vec<u64> = sch
        .placements
        .iter()
        .filter(|p| p.interval.length() != pow13(placed_exponent(sch.m, p.index)))
        .map(|p| p.index)
        .collect();
    let mut distance_failures = Vec::new();
    for (i, p) in sch.placements.iter().enumerate() {
        for q in &sch.placements[i + 1..] {
            let l = p.index.min(q.index);
            if p.interval.distance(&q.interval) < level_length(l) {
                distance_failures.push((p.index, q.index));
            }
        }
    }
    let thirds: Vec<ThirdCheck> = sch
        .b
        .iter()
        .map(|&b| {
            let block = block_set(sch, b).expect("same base");
            // count distinct placements, not merged components
            let block_size = sch.block(b).len();
            let expected = f_set(&[b].into()).map(|v| v.len()).unwrap_or(0);
            let top = 4u64.pow(b as u32);
            let hits_per_level: Vec<(u64, usize)> =
                (sch.l..top).map(|k| (k, block.max_hit_count(&level_length(k)))).collect();
            let total = hits_per_level.iter().map(|h| h.1).sum::<usize>();
            let sound = block.len() == block_size && block_size == expected;
            let mut envelope = 0usize;
            let mut denom = 6usize;
            for _ in sch.l..top {
                envelope += block_size / denom;
                denom = denom.saturating_mul(6);
            }
            ThirdCheck {
                b,
                block_size,
                hits_per_level,
                total,
                passes: sound && 3 * total <= block_size,
                strict: sound && 3 * total < block_size,
                envelope,
            }
        })
        .collect();
    let lengths_ok = length_failures.is_empty();
    let distances_ok = distance_failures.is_empty();
    let thirds_ok = thirds.iter().all(|t| t.passes);
    SpacingReport {
        length_failures,
        distance_failures,
        thirds,
        lengths_ok,
        distances_ok,
        thirds_ok,
        passed: lengths_ok && distances_ok && thirds_ok,
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::construct::spacing::spacing_place;
    use crate::interval::Interval;
    use crate::numeral::Numeral;

    fn unit() -> Interval {
        Interval::new(Numeral::zero(13).unwrap(), Numeral::from_int(13, 1).unwrap()).unwrap()
    }

    #[test]
    fn base_case_passes() {
        let sch = spacing_place(0, &unit(), &BTreeSet::from([1])).unwrap();
        let r = spacing_condition_check(&sch);
        assert!(r.passed, "{r:?}");
        // two placements share K^1_0, so a level-1 interval meets both
        assert_eq!(r.thirds[0].hits_per_level, vec![(1, 2), (2, 1), (3, 1)]);
    }

    #[test]
    fn second_block_exceeds_a_third() {
        // one level-1 interval meets the 8 placements inside K^1_0, and every
        // finer level still meets one placement
        let sch = spacing_place(0, &unit(), &BTreeSet::from([2])).unwrap();
        let r = spacing_condition_check(&sch);
        assert!(r.lengths_ok && r.distances_ok);
        let t = &r.thirds[0];
        assert_eq!(t.hits_per_level[0], (1, 8));
        assert_eq!(t.total, 23);
        assert!(!t.passes && !t.strict);
    }

    #[test]
    fn empty_b_is_vacuous() {
        let sch = spacing_place(0, &unit(), &BTreeSet::new()).unwrap();
        assert!(spacing_condition_check(&sch).passed);
    }

    #[test]
    fn shrunk_gap_fails_distance() {
        let mut sch = spacing_place(0, &unit(), &BTreeSet::from([1])).unwrap();
        // move I_5 right next to I_4
        let a = sch.placements[0].interval.clone();
        let len = sch.placements[1].interval.length();
        let lo = a.hi() + &pow13(1000);
        sch.placements[1].interval = Interval::with_length(lo, &len).unwrap();
        let r = spacing_condition_check(&sch);
        assert!(!r.distances_ok);
        assert!(r.distance_failures.contains(&(4, 5)));
    }
}
