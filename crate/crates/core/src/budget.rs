//! Budget families `f_k(ε) = ε^{e(k)}` with `ε = base^(-t)`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeral::{factorial, Numeral};

/// `ε = base^(-t)` with `t >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EpsilonSpec {
    pub base: u32,
    #[serde(with = "crate::serde_big")]
    pub t: BigInt,
}

impl EpsilonSpec {
    pub fn new(base: u32, t: impl Into<BigInt>) -> Result<Self> {
        let t = t.into();
        if base < 2 {
            return Err(Error::InvalidBase(base));
        }
        if t < BigInt::one() {
            return Err(Error::InvalidParameter(format!("epsilon exponent t must be >= 1, got {t}")));
        }
        Ok(EpsilonSpec { base, t })
    }

    /// `ε = 1/d` when `d` is an exact power of `base`.
    pub fn from_reciprocal(base: u32, d: u64) -> Result<Self> {
        let mut t = 0u32;
        let mut v = d;
        while v > 1 && v.is_multiple_of(base as u64) {
            v /= base as u64;
            t += 1;
        }
        if v != 1 || t == 0 {
            return Err(Error::InexpressibleEpsilon(d));
        }
        EpsilonSpec::new(base, t)
    }

    pub fn value(&self) -> Numeral {
        Numeral::from_power(self.base, self.t.clone()).expect("base validated")
    }
}

impl fmt::Display for EpsilonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^-{}", self.base, self.t)
    }
}

/// Exponent function `k ↦ e(k)` of a power family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FamilyKind {
    /// `e(k) = k + 1`.
    Micro,
    /// `e(k) = 2^k`.
    Nano,
    /// `e(k) = (k+1)!`.
    Pico,
    /// `(k+1)!` below `k0`, `(k+2)!` from `k0` on.
    Hybrid { k0: u64 },
    /// Explicit finite table.
    Custom {
        #[serde(with = "crate::serde_big::vec")]
        exps: Vec<BigInt>,
    },
    /// `e'(m·k + r) = e(k)` for `0 <= r < m`.
    Shifted { inner: Box<FamilyKind>, m: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerFamily {
    pub name: String,
    pub kind: FamilyKind,
    /// Finite horizon `K` whose partial sum was certified `< 1` at `horizon_eps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence_horizon: Option<(EpsilonSpec, u64)>,
}

impl PowerFamily {
    pub fn micro() -> Self {
        PowerFamily::from_kind(FamilyKind::Micro)
    }

    pub fn nano() -> Self {
        PowerFamily::from_kind(FamilyKind::Nano)
    }

    pub fn pico() -> Self {
        PowerFamily::from_kind(FamilyKind::Pico)
    }

    pub fn hybrid(k0: u64) -> Self {
        PowerFamily::from_kind(FamilyKind::Hybrid { k0 })
    }

    /// Custom table; must be nondecreasing with every entry `>= 1`.
    pub fn custom(exps: Vec<BigInt>) -> Result<Self> {
        if exps.is_empty() {
            return Err(Error::InvalidParameter("custom family needs at least one exponent".into()));
        }
        if exps.iter().any(|e| *e < BigInt::one()) {
            return Err(Error::InvalidParameter("custom exponents must be >= 1".into()));
        }
        if exps.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("custom exponents must be nondecreasing".into()));
        }
        Ok(PowerFamily::from_kind(FamilyKind::Custom { exps }))
    }

    fn from_kind(kind: FamilyKind) -> Self {
        PowerFamily { name: kind_name(&kind), kind, convergence_horizon: None }
    }

    /// Parses `micro|nano|pico|hybrid:<k0>|custom:<json>`; custom JSON is
    /// `{"exps": ["1","2",...]}`.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec {
            "micro" => Ok(Self::micro()),
            "nano" => Ok(Self::nano()),
            "pico" => Ok(Self::pico()),
            s if s.starts_with("hybrid:") => {
                let k0 = s[7..]
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad hybrid index in {s:?}")))?;
                Ok(Self::hybrid(k0))
            }
            s if s.starts_with("custom:") => Self::parse_custom_json(&s[7..]),
            other => Err(Error::InvalidParameter(format!("unknown family {other:?}"))),
        }
    }

    pub fn parse_custom_json(json: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Table {
            exps: Vec<String>,
        }
        let t: Table = serde_json::from_str(json).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let exps = t
            .exps
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(|e| Error::InvalidParameter(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::custom(exps)
    }

    /// `e(k)`; fails only past the end of a custom table.
    pub fn exponent(&self, k: u64) -> Result<BigInt> {
        kind_exponent(&self.kind, k)
    }

    /// Number of indices with a defined exponent, if finite.
    pub fn defined_len(&self) -> Option<u64> {
        kind_len(&self.kind)
    }

    /// Certifies that the partial sum over `k < horizon` at `eps` is below 1.
    pub fn with_convergence_horizon(mut self, eps: &EpsilonSpec, horizon: u64) -> Result<Self> {
        let (_, ok) = partial_sum_check(&self, eps, horizon)?;
        if !ok {
            return Err(Error::Uncertified(format!("partial sum of {} up to {horizon} is not below 1", self.name)));
        }
        self.convergence_horizon = Some((eps.clone(), horizon));
        Ok(self)
    }
}

fn kind_name(kind: &FamilyKind) -> String {
    match kind {
        FamilyKind::Micro => "micro".into(),
        FamilyKind::Nano => "nano".into(),
        FamilyKind::Pico => "pico".into(),
        FamilyKind::Hybrid { k0 } => format!("hybrid:{k0}"),
        FamilyKind::Custom { .. } => "custom".into(),
        FamilyKind::Shifted { inner, m } => format!("{m}-{}", kind_name(inner)),
    }
}

fn kind_exponent(kind: &FamilyKind, k: u64) -> Result<BigInt> {
    Ok(match kind {
        FamilyKind::Micro => BigInt::from(k) + 1,
        FamilyKind::Nano => BigInt::one() << k,
        FamilyKind::Pico => factorial(k + 1),
        FamilyKind::Hybrid { k0 } => {
            if k < *k0 {
                factorial(k + 1)
            } else {
                factorial(k + 2)
            }
        }
        FamilyKind::Custom { exps } => exps
            .get(k as usize)
            .cloned()
            .ok_or_else(|| Error::HorizonExceeded(format!("custom family has no exponent for index {k}")))?,
        FamilyKind::Shifted { inner, m } => kind_exponent(inner, k / m)?,
    })
}

fn kind_len(kind: &FamilyKind) -> Option<u64> {
    match kind {
        FamilyKind::Custom { exps } => Some(exps.len() as u64),
        FamilyKind::Shifted { inner, m } => kind_len(inner).map(|n| n * m),
        _ => None,
    }
}

/// `f_k(ε) = base^(-t·e(k))`.
pub fn budget_length(fam: &PowerFamily, k: u64, eps: &EpsilonSpec) -> Result<Numeral> {
    let e = fam.exponent(k)?;
    Numeral::from_power(eps.base, &eps.t * e)
}

/// The `m`-shifted family: `m` consecutive indices share one budget level.
pub fn shift_family(fam: &PowerFamily, m: u64) -> Result<PowerFamily> {
    if m == 0 {
        return Err(Error::InvalidParameter("shift multiplicity must be >= 1".into()));
    }
    if m == 1 {
        return Ok(fam.clone());
    }
    let kind = FamilyKind::Shifted { inner: Box::new(fam.kind.clone()), m };
    Ok(PowerFamily { name: kind_name(&kind), kind, convergence_horizon: None })
}

/// Exact `Σ_{k<K} f_k(ε)` and whether it is below 1.
pub fn partial_sum_check(fam: &PowerFamily, eps: &EpsilonSpec, horizon: u64) -> Result<(Numeral, bool)> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("partial sum horizon must be >= 1".into()));
    }
    let mut sum = Numeral::zero(eps.base)?;
    for k in 0..horizon {
        sum = &sum + &budget_length(fam, k, eps)?;
    }
    let one = Numeral::from_power(eps.base, BigInt::zero())?;
    let below = sum < one;
    Ok((sum, below))
}

/// A finite list of budget lengths; banned indices are withheld (empty interval).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetList {
    pub lengths: Vec<Numeral>,
    #[serde(default)]
    pub banned: BTreeSet<usize>,
}

impl BudgetList {
    pub fn new(lengths: Vec<Numeral>, banned: BTreeSet<usize>) -> Result<Self> {
        if lengths.iter().any(|l| !l.is_positive()) {
            return Err(Error::InvalidParameter("budget lengths must be positive".into()));
        }
        if let Some(b) = banned.iter().find(|&&b| b >= lengths.len()) {
            return Err(Error::InvalidParameter(format!("banned index {b} out of range")));
        }
        if let Some(first) = lengths.first() {
            if lengths.iter().any(|l| l.base() != first.base()) {
                return Err(Error::BaseMismatch(first.base(), lengths.iter().find(|l| l.base() != first.base()).map(|l| l.base()).unwrap_or(0)));
            }
        }
        Ok(BudgetList { lengths, banned })
    }

    /// The first `count` budgets of a family at `eps`.
    pub fn from_family(fam: &PowerFamily, eps: &EpsilonSpec, count: usize, banned: BTreeSet<usize>) -> Result<Self> {
        let lengths = (0..count as u64).map(|k| budget_length(fam, k, eps)).collect::<Result<Vec<_>>>()?;
        BudgetList::new(lengths, banned)
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn is_banned(&self, i: usize) -> bool {
        self.banned.contains(&i)
    }

    /// Indices that may be used, in order.
    pub fn usable(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.lengths.len()).filter(|i| !self.banned.contains(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(base: u32, t: u64) -> EpsilonSpec {
        EpsilonSpec::new(base, t).unwrap()
    }

    fn pw(base: u32, e: u64) -> Numeral {
        Numeral::from_power(base, e).unwrap()
    }

    #[test]
    fn budget_examples() {
        assert_eq!(budget_length(&PowerFamily::nano(), 3, &eps(2, 2)).unwrap(), pw(2, 16));
        assert_eq!(budget_length(&PowerFamily::pico(), 2, &eps(13, 1)).unwrap(), pw(13, 6));
        for t in 1..4 {
            assert_eq!(budget_length(&PowerFamily::micro(), 0, &eps(2, t)).unwrap(), eps(2, t).value());
        }
    }

    #[test]
    fn hybrid_switches_at_k0() {
        let h = PowerFamily::hybrid(2);
        assert_eq!(h.exponent(1).unwrap(), BigInt::from(2));
        assert_eq!(h.exponent(2).unwrap(), BigInt::from(24));
    }

    #[test]
    fn shift_examples() {
        let nano = PowerFamily::nano();
        let s = shift_family(&nano, 2).unwrap();
        assert_eq!(budget_length(&s, 5, &eps(2, 1)).unwrap(), pw(2, 4));
        assert_eq!(shift_family(&nano, 1).unwrap(), nano);
        let p2 = shift_family(&PowerFamily::pico(), 2).unwrap();
        assert_eq!(p2.exponent(0).unwrap(), BigInt::one());
        assert_eq!(p2.exponent(1).unwrap(), BigInt::one());
        assert!(shift_family(&nano, 0).is_err());
    }

    #[test]
    fn partial_sums() {
        let (s, ok) = partial_sum_check(&PowerFamily::nano(), &eps(2, 1), 4).unwrap();
        let expect = [1u64, 2, 4, 8].iter().fold(Numeral::zero(2).unwrap(), |a, &e| &a + &pw(2, e));
        assert_eq!(s, expect);
        assert!(ok);
        let (s, ok) = partial_sum_check(&PowerFamily::micro(), &eps(2, 1), 10).unwrap();
        assert_eq!(s, &pw(2, 0) - &pw(2, 10));
        assert!(ok);
        let (s, ok) = partial_sum_check(&PowerFamily::pico(), &eps(13, 1), 1).unwrap();
        assert_eq!(s, pw(13, 1));
        assert!(ok);
    }

    #[test]
    fn families_are_nonincreasing() {
        let e = eps(13, 1);
        for fam in [PowerFamily::micro(), PowerFamily::nano(), PowerFamily::pico(), PowerFamily::hybrid(3)] {
            for k in 0..12 {
                let a = budget_length(&fam, k, &e).unwrap();
                let b = budget_length(&fam, k + 1, &e).unwrap();
                assert!(b <= a, "{} at {k}", fam.name);
            }
        }
    }

    #[test]
    fn budget_shrinks_as_t_grows() {
        for k in 0..6 {
            for t in 1..5 {
                let a = budget_length(&PowerFamily::nano(), k, &eps(2, t)).unwrap();
                let b = budget_length(&PowerFamily::nano(), k, &eps(2, t + 1)).unwrap();
                assert!(b <= a);
            }
        }
    }

    #[test]
    fn shifted_index_agrees_with_original() {
        for fam in [PowerFamily::nano(), PowerFamily::pico(), PowerFamily::micro()] {
            for m in 1..=4 {
                let s = shift_family(&fam, m).unwrap();
                for k in 0..8 {
                    assert_eq!(s.exponent(m * k).unwrap(), fam.exponent(k).unwrap());
                }
            }
        }
    }

    #[test]
    fn parse_and_custom() {
        assert_eq!(PowerFamily::parse("hybrid:3").unwrap(), PowerFamily::hybrid(3));
        let c = PowerFamily::parse(r#"custom:{"exps": ["1","2","6"]}"#).unwrap();
        assert_eq!(c.exponent(2).unwrap(), BigInt::from(6));
        assert!(c.exponent(3).is_err());
        assert!(PowerFamily::custom(vec![BigInt::from(2), BigInt::from(1)]).is_err());
        assert!(PowerFamily::custom(vec![BigInt::zero()]).is_err());
        assert!(PowerFamily::parse("femto").is_err());
    }

    #[test]
    fn epsilon_validation() {
        assert!(EpsilonSpec::new(2, 0).is_err());
        assert_eq!(EpsilonSpec::from_reciprocal(2, 4).unwrap(), eps(2, 2));
        assert!(EpsilonSpec::from_reciprocal(2, 3).is_err());
    }

    #[test]
    fn budget_list_checks() {
        let l = BudgetList::from_family(&PowerFamily::nano(), &eps(2, 2), 4, [1].into()).unwrap();
        assert_eq!(l.usable().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert!(BudgetList::new(vec![pw(2, 1)], [3].into()).is_err());
    }

    #[test]
    fn convergence_horizon_certificate() {
        let f = PowerFamily::nano().with_convergence_horizon(&eps(2, 1), 20).unwrap();
        assert!(f.convergence_horizon.is_some());
    }
}
