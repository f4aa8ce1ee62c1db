//! The dense `G_δ` set `X = ⋂_n ⋃ P_n` over the rationals of `[0, 1]`,
//! where `P_n` has an interval of length `f_i(1/(n+1))` at `q_i`.
//!
//! Intervals are centered at `q_i` when both `q_i` and half the length are
//! finite numerals in the base. Otherwise the interval is the grid cell of
//! the same length that contains `q_i`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::budget::{EpsilonSpec, PowerFamily};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::numeral::Numeral;

/// Largest grid exponent materialized for a non-centered interval.
pub const GRID_DIGIT_LIMIT: u64 = 1 << 14;

/// The `i`-th rational of `[0, 1]`: `0`, `1`, then reduced fractions by
/// denominator and numerator. Returns `(p, q)`.
pub fn rational(i: u64) -> (u64, u64) {
    match i {
        0 => (0, 1),
        1 => (1, 1),
        _ => {
            let mut left = i - 2;
            let mut d = 2u64;
            loop {
                for p in 1..d {
                    if p.gcd(&d) == 1 {
                        if left == 0 {
                            return (p, d);
                        }
                        left -= 1;
                    }
                }
                d += 1;
            }
        }
    }
}

/// Index of `p/q` in the enumeration, for reduced `p/q ∈ [0, 1]`.
pub fn rational_index(p: u64, q: u64) -> Option<u64> {
    if q == 0 || p > q || p.gcd(&q) != 1 {
        return None;
    }
    match (p, q) {
        (0, 1) => Some(0),
        (1, 1) => Some(1),
        _ => {
            let before: u64 = (2..q).map(totient).sum();
            let within = (1..p).filter(|&a| a.gcd(&q) == 1).count() as u64;
            Some(2 + before + within)
        }
    }
}

fn totient(n: u64) -> u64 {
    (1..n).filter(|&a| a.gcd(&n) == 1).count() as u64
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GdeltaRationalScheme {
    pub family: PowerFamily,
    pub base: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalInterval {
    pub index: u64,
    pub p: u64,
    pub q: u64,
    pub interval: Interval,
    pub centered: bool,
}

impl GdeltaRationalScheme {
    pub fn new(family: PowerFamily, base: u32) -> Result<Self> {
        Numeral::zero(base)?;
        Ok(GdeltaRationalScheme { family, base })
    }
}

/// `p/q` as a numeral, when `q` divides a power of the base.
fn exact_ratio(base: u32, p: u64, q: u64) -> Option<Numeral> {
    let b = BigInt::from(base);
    let (mut scale, mut s) = (BigInt::one(), 0u64);
    while s <= 64 {
        if (&scale % q).is_zero() {
            let num = BigInt::from(p) * (&scale / q);
            return Numeral::from_int(base, num).ok().map(|n| n.shift(&BigInt::from(s)));
        }
        scale *= &b;
        s += 1;
    }
    None
}

/// The first `count` intervals of `P_n`, for `1/(n+1)` a power of the base.
pub fn rational_cover_stage(sch: &GdeltaRationalScheme, n: u64, count: u64) -> Result<Vec<RationalInterval>> {
    let eps = EpsilonSpec::from_reciprocal(sch.base, n + 1)?;
    let mut out = Vec::with_capacity(count as usize);
    for i in 0..count {
        let (p, q) = rational(i);
        let e = &eps.t * sch.family.exponent(i)?;
        let len = Numeral::from_power(sch.base, e.clone())?;
        let centered = match (exact_ratio(sch.base, p, q), sch.base.is_multiple_of(2)) {
            (Some(c), true) => {
                let half = Numeral::from_int(sch.base, sch.base / 2)?.shift(&(e.clone() + 1));
                Some(Interval::new(&c - &half, &c + &half)?)
            }
            _ => None,
        };
        let (interval, is_centered) = match centered {
            Some(iv) => (iv, true),
            None => {
                if e > BigInt::from(GRID_DIGIT_LIMIT) {
                    return Err(Error::HorizonExceeded(format!("grid of 1/{}^{e} around {p}/{q}", sch.base)));
                }
                let digits = u64::try_from(&e).expect("bounded above");
                let a = (BigInt::from(p) * BigInt::from(sch.base).pow(digits as u32)).div_floor(&BigInt::from(q));
                let lo = Numeral::from_int(sch.base, a)?.shift(&e);
                (Interval::with_length(lo, &len)?, false)
            }
        };
        out.push(RationalInterval { index: i, p, q, interval, centered: is_centered });
    }
    Ok(out)
}
