//! Exact signed values of the form `± Σ d · b^(-e)` over a small base `b`.
//!
//! Digits are stored as runs `(lo, hi, digit)`: the digit repeats at every
//! exponent position `lo..=hi`. Exponents are arbitrary-precision integers, so
//! values such as `13^(-(k+1)!)` for large `k` are ordinary numerals, and a
//! borrow across an exponent gap of any size costs one run instead of one digit
//! per position.
//!
//! Arithmetic walks the union of run boundaries of both operands. Inside a
//! segment where both digit sequences are constant, the carry (or borrow)
//! becomes constant after at most one position, so each segment yields at most
//! two output runs.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One run of a repeated digit at exponent positions `lo..=hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Run {
    pub lo: BigInt,
    pub hi: BigInt,
    pub digit: u32,
}

impl Run {
    pub fn new(lo: impl Into<BigInt>, hi: impl Into<BigInt>, digit: u32) -> Self {
        Run { lo: lo.into(), hi: hi.into(), digit }
    }
}

/// Exact value `sign · Σ_runs Σ_{e=lo..=hi} digit · base^(-e)` in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Numeral {
    base: u32,
    sign: i8,
    runs: Vec<Run>,
}

impl Numeral {
    pub fn zero(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(Numeral { base, sign: 0, runs: Vec::new() })
    }

    /// `base^(-e)`.
    pub fn from_power(base: u32, e: impl Into<BigInt>) -> Result<Self> {
        check_base(base)?;
        let e = e.into();
        Ok(Numeral { base, sign: 1, runs: vec![Run { lo: e.clone(), hi: e, digit: 1 }] })
    }

    /// `digit · base^(-e)` for `0 <= digit < base`.
    pub fn digit_at(base: u32, digit: u32, e: impl Into<BigInt>) -> Result<Self> {
        check_base(base)?;
        if digit >= base {
            return Err(Error::MalformedNumeral(format!("digit {digit} out of range for base {base}")));
        }
        if digit == 0 {
            return Numeral::zero(base);
        }
        let e = e.into();
        Ok(Numeral { base, sign: 1, runs: vec![Run { lo: e.clone(), hi: e, digit }] })
    }

    /// Exact integer value `n`.
    pub fn from_int(base: u32, n: impl Into<BigInt>) -> Result<Self> {
        check_base(base)?;
        let n: BigInt = n.into();
        let sign = match n.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => return Numeral::zero(base),
            num_bigint::Sign::Plus => 1,
        };
        let mut mag = n.abs();
        let b = BigInt::from(base);
        let mut runs = Vec::new();
        let mut pos = BigInt::zero();
        while !mag.is_zero() {
            let (q, r) = mag.div_rem(&b);
            let d = r.to_u32().unwrap_or(0);
            if d != 0 {
                runs.push(Run { lo: pos.clone(), hi: pos.clone(), digit: d });
            }
            pos -= 1;
            mag = q;
        }
        runs.reverse();
        Ok(Numeral { base, sign, runs: canonical_runs(runs) })
    }

    /// Builds a numeral from arbitrary (possibly non-canonical) runs.
    ///
    /// Runs must lie in `1..base` and must not overlap; they may arrive in any
    /// order and adjacent equal-digit runs are merged.
    pub fn from_runs(base: u32, sign: i8, mut runs: Vec<Run>) -> Result<Self> {
        check_base(base)?;
        if !(-1..=1).contains(&sign) {
            return Err(Error::MalformedNumeral(format!("sign {sign} not in -1..=1")));
        }
        for r in &runs {
            if r.digit == 0 || r.digit >= base {
                return Err(Error::MalformedNumeral(format!(
                    "digit {} out of range 1..{base}",
                    r.digit
                )));
            }
            if r.lo > r.hi {
                return Err(Error::MalformedNumeral("run with lo > hi".into()));
            }
        }
        runs.sort_by(|a, b| a.lo.cmp(&b.lo));
        for w in runs.windows(2) {
            if w[0].hi >= w[1].lo {
                return Err(Error::MalformedNumeral("overlapping runs".into()));
            }
        }
        let runs = canonical_runs(runs);
        match (runs.is_empty(), sign) {
            (true, 0) => Ok(Numeral { base, sign: 0, runs }),
            (true, _) => Err(Error::MalformedNumeral("nonzero sign with no digits".into())),
            (false, 0) => Err(Error::MalformedNumeral("zero sign with digits".into())),
            (false, s) => Ok(Numeral { base, sign: s, runs }),
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }

    pub fn abs(&self) -> Numeral {
        let mut out = self.clone();
        out.sign = out.sign.abs();
        out
    }

    /// Exponent of the most significant nonzero digit.
    pub fn leading_exponent(&self) -> Option<&BigInt> {
        self.runs.first().map(|r| &r.lo)
    }

    /// Exponent of the least significant nonzero digit.
    pub fn trailing_exponent(&self) -> Option<&BigInt> {
        self.runs.last().map(|r| &r.hi)
    }

    /// If the value is exactly `base^(-e)`, returns `e`.
    pub fn as_power(&self) -> Option<&BigInt> {
        match self.runs.as_slice() {
            [r] if self.sign == 1 && r.digit == 1 && r.lo == r.hi => Some(&r.lo),
            _ => None,
        }
    }

    pub fn try_add(&self, other: &Numeral) -> Result<Numeral> {
        same_base(self, other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_sub(&self, other: &Numeral) -> Result<Numeral> {
        same_base(self, other)?;
        Ok(self.add_unchecked(&-other))
    }

    pub fn try_cmp(&self, other: &Numeral) -> Result<Ordering> {
        same_base(self, other)?;
        Ok(self.cmp_unchecked(other))
    }

    fn add_unchecked(&self, other: &Numeral) -> Numeral {
        if self.sign == 0 {
            return other.clone();
        }
        if other.sign == 0 {
            return self.clone();
        }
        if self.sign == other.sign {
            return Numeral { base: self.base, sign: self.sign, runs: mag_add(self.base, &self.runs, &other.runs) };
        }
        match mag_cmp(&self.runs, &other.runs) {
            Ordering::Equal => Numeral { base: self.base, sign: 0, runs: Vec::new() },
            Ordering::Greater => Numeral { base: self.base, sign: self.sign, runs: mag_sub(self.base, &self.runs, &other.runs) },
            Ordering::Less => Numeral { base: self.base, sign: other.sign, runs: mag_sub(self.base, &other.runs, &self.runs) },
        }
    }

    fn cmp_unchecked(&self, other: &Numeral) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            o => return o,
        }
        match self.sign {
            0 => Ordering::Equal,
            1 => mag_cmp(&self.runs, &other.runs),
            _ => mag_cmp(&other.runs, &self.runs),
        }
    }

    /// Multiplies by `base^(-s)`.
    pub fn shift(&self, s: &BigInt) -> Numeral {
        let runs = self
            .runs
            .iter()
            .map(|r| Run { lo: &r.lo + s, hi: &r.hi + s, digit: r.digit })
            .collect();
        Numeral { base: self.base, sign: self.sign, runs }
    }

    /// Exact `n · self`, by doubling and adding.
    pub fn scale_small(&self, n: u64) -> Numeral {
        let mut acc = Numeral { base: self.base, sign: 0, runs: Vec::new() };
        let mut pow = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.add_unchecked(&pow);
            }
            k >>= 1;
            if k > 0 {
                pow = pow.add_unchecked(&pow);
            }
        }
        acc
    }

    /// Exact `t · self` for an arbitrary integer multiplier, by shift-and-add
    /// over the base-`b` digits of `t`.
    pub fn scale_big(&self, t: &BigInt) -> Numeral {
        if t.is_zero() || self.is_zero() {
            return Numeral { base: self.base, sign: 0, runs: Vec::new() };
        }
        let b = BigInt::from(self.base);
        let mut mag = t.abs();
        let mut acc = Numeral { base: self.base, sign: 0, runs: Vec::new() };
        let mut place = BigInt::zero();
        while !mag.is_zero() {
            let (q, r) = mag.div_rem(&b);
            let d = r.to_u64().unwrap_or(0);
            if d != 0 {
                acc = acc.add_unchecked(&self.scale_small(d).shift(&-&place));
            }
            place += 1;
            mag = q;
        }
        if t.is_negative() {
            -acc
        } else {
            acc
        }
    }

    /// Approximate `log_base(|value|)`, good to a few ulps when exponents fit in f64.
    pub fn approx_log_base(&self) -> Option<f64> {
        let first = self.runs.first()?;
        let lead = first.lo.to_f64().filter(|x| x.abs() < 1e15)?;
        let b = self.base as f64;
        // mantissa from the first few digit positions
        let mut mant = 0.0;
        let mut scale = 1.0;
        let mut pos = first.lo.clone();
        for _ in 0..20 {
            mant += self.digit_of(&pos) as f64 * scale;
            scale /= b;
            pos += 1;
        }
        Some(mant.log(b) - lead)
    }

    fn digit_of(&self, e: &BigInt) -> u32 {
        for r in &self.runs {
            if &r.lo <= e && e <= &r.hi {
                return r.digit;
            }
        }
        0
    }

    /// Approximate decimal rendering, always prefixed with `≈` unless exact zero.
    pub fn approx_decimal(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let sign = if self.sign < 0 { "-" } else { "" };
        match self.approx_log_base() {
            Some(lg) => {
                let l10 = lg * (self.base as f64).log10();
                let exp = l10.floor();
                let mant = 10f64.powf(l10 - exp);
                format!("≈{sign}{mant:.6}e{exp}")
            }
            None => {
                let e = self.leading_exponent().cloned().unwrap_or_default();
                format!("≈{sign}{}^-{} [exponent has {} digits]", self.base, e, e.to_string().len())
            }
        }
    }
}

fn check_base(base: u32) -> Result<()> {
    if base < 2 {
        Err(Error::InvalidBase(base))
    } else {
        Ok(())
    }
}

fn same_base(a: &Numeral, b: &Numeral) -> Result<()> {
    if a.base != b.base {
        Err(Error::BaseMismatch(a.base, b.base))
    } else {
        Ok(())
    }
}

/// Drops zero runs and merges adjacent runs with equal digits. Input sorted.
fn canonical_runs(runs: Vec<Run>) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::with_capacity(runs.len());
    for r in runs {
        if r.digit == 0 {
            continue;
        }
        if let Some(last) = out.last_mut() {
            if last.digit == r.digit && &last.hi + 1 == r.lo {
                last.hi = r.hi;
                continue;
            }
        }
        out.push(r);
    }
    out
}

/// Segments `(lo, hi, da, db)` covering the span of both operands in
/// ascending exponent order; digits are constant inside each segment.
fn segments(a: &[Run], b: &[Run]) -> Vec<(BigInt, BigInt, u32, u32)> {
    let mut cuts: Vec<BigInt> = Vec::with_capacity(2 * (a.len() + b.len()));
    for r in a.iter().chain(b) {
        cuts.push(r.lo.clone());
        cuts.push(&r.hi + 1);
    }
    cuts.sort();
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len());
    let (mut ia, mut ib) = (0usize, 0usize);
    for w in cuts.windows(2) {
        let (lo, hi) = (&w[0], &w[1] - 1);
        while ia < a.len() && a[ia].hi < *lo {
            ia += 1;
        }
        while ib < b.len() && b[ib].hi < *lo {
            ib += 1;
        }
        let da = if ia < a.len() && a[ia].lo <= *lo { a[ia].digit } else { 0 };
        let db = if ib < b.len() && b[ib].lo <= *lo { b[ib].digit } else { 0 };
        out.push((lo.clone(), hi, da, db));
    }
    out
}

fn push_desc(out: &mut Vec<Run>, lo: BigInt, hi: BigInt, digit: u32) {
    if digit != 0 {
        out.push(Run { lo, hi, digit });
    }
}

fn mag_add(base: u32, a: &[Run], b: &[Run]) -> Vec<Run> {
    let segs = segments(a, b);
    let mut out = Vec::with_capacity(segs.len() + 1);
    let mut carry = 0u32;
    let step = |da: u32, db: u32, c: u32| {
        let s = da + db + c;
        (s % base, s / base)
    };
    for (lo, hi, da, db) in segs.iter().rev() {
        let (d0, c1) = step(*da, *db, carry);
        if c1 == carry {
            push_desc(&mut out, lo.clone(), hi.clone(), d0);
        } else {
            push_desc(&mut out, hi.clone(), hi.clone(), d0);
            if lo < hi {
                let (d1, c2) = step(*da, *db, c1);
                debug_assert_eq!(c2, c1);
                push_desc(&mut out, lo.clone(), hi - 1, d1);
            }
        }
        carry = c1;
    }
    if carry > 0 {
        let e: BigInt = segs.first().map(|s| &s.0 - 1).unwrap_or_default();
        out.push(Run { lo: e.clone(), hi: e, digit: carry });
    }
    out.reverse();
    canonical_runs(out)
}

/// `|a| - |b|`, requires `|a| >= |b|`.
fn mag_sub(base: u32, a: &[Run], b: &[Run]) -> Vec<Run> {
    let segs = segments(a, b);
    let mut out = Vec::with_capacity(segs.len() + 1);
    let mut borrow = 0u32;
    let step = |da: u32, db: u32, c: u32| {
        let s = da as i64 - db as i64 - c as i64;
        if s < 0 {
            ((s + base as i64) as u32, 1u32)
        } else {
            (s as u32, 0u32)
        }
    };
    for (lo, hi, da, db) in segs.iter().rev() {
        let (d0, c1) = step(*da, *db, borrow);
        if c1 == borrow {
            push_desc(&mut out, lo.clone(), hi.clone(), d0);
        } else {
            push_desc(&mut out, hi.clone(), hi.clone(), d0);
            if lo < hi {
                let (d1, c2) = step(*da, *db, c1);
                debug_assert_eq!(c2, c1);
                push_desc(&mut out, lo.clone(), hi - 1, d1);
            }
        }
        borrow = c1;
    }
    debug_assert_eq!(borrow, 0, "mag_sub requires |a| >= |b|");
    out.reverse();
    canonical_runs(out)
}

fn mag_cmp(a: &[Run], b: &[Run]) -> Ordering {
    for (_, _, da, db) in segments(a, b) {
        if da != db {
            return da.cmp(&db);
        }
    }
    Ordering::Equal
}

impl Neg for Numeral {
    type Output = Numeral;
    fn neg(mut self) -> Numeral {
        self.sign = -self.sign;
        self
    }
}

impl Neg for &Numeral {
    type Output = Numeral;
    fn neg(self) -> Numeral {
        -self.clone()
    }
}

// The operator forms panic on base mismatch; use `try_add`/`try_sub` on
// untrusted input.
impl Add for &Numeral {
    type Output = Numeral;
    fn add(self, rhs: &Numeral) -> Numeral {
        assert_eq!(self.base, rhs.base, "numeral base mismatch");
        self.add_unchecked(rhs)
    }
}

impl Sub for &Numeral {
    type Output = Numeral;
    fn sub(self, rhs: &Numeral) -> Numeral {
        assert_eq!(self.base, rhs.base, "numeral base mismatch");
        self.add_unchecked(&-rhs)
    }
}

impl Add for Numeral {
    type Output = Numeral;
    fn add(self, rhs: Numeral) -> Numeral {
        &self + &rhs
    }
}

impl Sub for Numeral {
    type Output = Numeral;
    fn sub(self, rhs: Numeral) -> Numeral {
        &self - &rhs
    }
}

impl PartialOrd for Numeral {
    fn partial_cmp(&self, other: &Numeral) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

impl fmt::Debug for Numeral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Exact symbolic form, e.g. `+[2: 1@3, 1@5..7]`.
impl fmt::Display for Numeral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0[{}]", self.base);
        }
        let s = if self.sign < 0 { '-' } else { '+' };
        write!(f, "{s}[{}:", self.base)?;
        for (i, r) in self.runs.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            if r.lo == r.hi {
                write!(f, "{sep}{}@{}", r.digit, r.lo)?;
            } else {
                write!(f, "{sep}{}@{}..{}", r.digit, r.lo, r.hi)?;
            }
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct RunRepr {
    lo: String,
    hi: String,
    digit: u32,
}

#[derive(Serialize, Deserialize)]
struct NumeralRepr {
    base: u32,
    sign: i8,
    runs: Vec<RunRepr>,
}

impl Serialize for Numeral {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NumeralRepr {
            base: self.base,
            sign: self.sign,
            runs: self
                .runs
                .iter()
                .map(|r| RunRepr { lo: r.lo.to_string(), hi: r.hi.to_string(), digit: r.digit })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Numeral {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = NumeralRepr::deserialize(d)?;
        let mut runs = Vec::with_capacity(repr.runs.len());
        for r in repr.runs {
            let lo: BigInt = r.lo.parse().map_err(D::Error::custom)?;
            let hi: BigInt = r.hi.parse().map_err(D::Error::custom)?;
            runs.push(Run { lo, hi, digit: r.digit });
        }
        Numeral::from_runs(repr.base, repr.sign, runs).map_err(D::Error::custom)
    }
}

/// Integer power helper shared by constructions: `base^n` as `BigInt`.
pub fn big_pow(base: u32, n: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), n as usize)
}

/// `n!` as `BigInt`.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(base: u32, e: i64) -> Numeral {
        Numeral::from_power(base, e).unwrap()
    }

    #[test]
    fn from_power_examples() {
        let a = p(2, 4);
        assert_eq!(a.runs(), &[Run::new(4, 4, 1)]);
        assert_eq!(p(13, 0), Numeral::from_int(13, 1).unwrap());
        assert_eq!(p(13, 120).as_power(), Some(&BigInt::from(120)));
        assert_eq!(Numeral::from_power(1, 3), Err(Error::InvalidBase(1)));
    }

    #[test]
    fn carry_and_borrow() {
        assert_eq!(&p(2, 3) + &p(2, 3), p(2, 2));
        let d = &p(2, 1) - &p(2, 100);
        assert_eq!(d.runs(), &[Run::new(2, 100, 1)]);
        let twelve = Numeral::digit_at(13, 12, 1).unwrap();
        let two = Numeral::digit_at(13, 2, 1).unwrap();
        let s = &twelve + &two;
        assert_eq!(s.runs(), &[Run::new(0, 1, 1)]);
    }

    #[test]
    fn compare_examples() {
        let a = p(13, 6);
        let b = Numeral::digit_at(13, 2, 7).unwrap();
        assert_eq!(a.try_cmp(&b).unwrap(), Ordering::Greater);
        let z = Numeral::zero(13).unwrap();
        assert_eq!(z.try_cmp(&z).unwrap(), Ordering::Equal);
        let huge = Numeral::from_power(2, BigInt::one() << 17).unwrap();
        assert_eq!(huge.try_cmp(&p(2, 13)).unwrap(), Ordering::Less);
        assert_eq!(p(2, 1).try_cmp(&p(13, 1)), Err(Error::BaseMismatch(2, 13)));
    }

    #[test]
    fn scale_examples() {
        assert_eq!(p(2, 4).scale_small(3), &p(2, 3) + &p(2, 4));
        assert!(p(2, 4).scale_small(0).is_zero());
        // 13 · 13^(-(1+1)!) = 13^(-1)
        assert_eq!(p(13, 2).scale_small(13), p(13, 1));
        let t = BigInt::from(1_000_003u64);
        assert_eq!(p(2, 40).scale_big(&t), p(2, 40).scale_small(1_000_003));
        assert_eq!(p(13, 40).scale_big(&-t.clone()), -p(13, 40).scale_small(1_000_003));
    }

    #[test]
    fn negative_exponents_and_integers() {
        let five = Numeral::from_int(2, 5).unwrap();
        assert_eq!(five.runs(), &[Run::new(-2, -2, 1), Run::new(0, 0, 1)]);
        let seven = Numeral::from_int(2, 7).unwrap();
        assert_eq!(seven.runs(), &[Run::new(-2, 0, 1)]);
        assert_eq!(&five + &Numeral::from_int(2, 2).unwrap(), seven);
    }

    #[test]
    fn from_runs_rejects_malformed() {
        assert!(Numeral::from_runs(2, 1, vec![Run::new(1, 1, 2)]).is_err());
        assert!(Numeral::from_runs(2, 1, vec![Run::new(1, 3, 1), Run::new(3, 4, 1)]).is_err());
        assert!(Numeral::from_runs(2, 0, vec![Run::new(1, 1, 1)]).is_err());
        let n = Numeral::from_runs(2, 1, vec![Run::new(4, 5, 1), Run::new(1, 3, 1)]).unwrap();
        assert_eq!(n.runs(), &[Run::new(1, 5, 1)]);
    }

    #[test]
    fn huge_gap_borrow_is_one_run() {
        let e: BigInt = "1".repeat(1000).parse().unwrap();
        let d = &p(13, 1) - &Numeral::from_power(13, e.clone()).unwrap();
        assert_eq!(d.runs(), &[Run { lo: BigInt::from(2), hi: e, digit: 12 }]);
    }

    #[test]
    fn json_round_trip() {
        let n = &p(13, 5) - &Numeral::from_power(13, BigInt::from(10).pow(40)).unwrap();
        let s = serde_json::to_string(&n).unwrap();
        let back: Numeral = serde_json::from_str(&s).unwrap();
        assert_eq!(back, n);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn approx_display_is_marked() {
        assert!(p(2, 4).approx_decimal().starts_with("≈6.25"));
        let huge = Numeral::from_power(2, BigInt::from(10).pow(400)).unwrap();
        assert!(huge.approx_decimal().contains("digits"));
    }
}
