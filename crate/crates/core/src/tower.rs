//! Exact comparison of nonnegative integers written as `2^h + c`, nested.
//!
//! Length exponents deep in the nano scheme are `2^(2^j + 1)` with `j` itself
//! hundreds of bits long; they cannot be materialized but can be compared.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

/// Largest `h` for which `2^h` is materialized as a `BigInt`.
pub const MATERIALIZE_LIMIT: u64 = 1 << 20;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Tower {
    Int(BigInt),
    /// `2^h + c`
    Pow2(Box<Tower>, BigInt),
}

impl Tower {
    pub fn int(n: impl Into<BigInt>) -> Self {
        Tower::Int(n.into())
    }

    pub fn pow2(h: Tower) -> Self {
        Tower::Pow2(Box::new(h), BigInt::zero())
    }

    pub fn plus(self, c: &BigInt) -> Self {
        match self {
            Tower::Int(n) => Tower::Int(n + c),
            Tower::Pow2(h, d) => Tower::Pow2(h, d + c),
        }
    }

    /// Exact value when small enough to hold.
    pub fn to_big(&self) -> Option<BigInt> {
        match self {
            Tower::Int(n) => Some(n.clone()),
            Tower::Pow2(h, c) => {
                let h = h.to_big()?.to_u64()?;
                if h > MATERIALIZE_LIMIT {
                    return None;
                }
                Some((BigInt::one() << h) + c)
            }
        }
    }

    /// `c < 2^h`, so that `2^h` dominates.
    fn addend_small(h: &Tower, c: &BigInt) -> bool {
        Tower::int(c.bits()).partial_cmp(h) != Some(Ordering::Greater)
    }
}

impl PartialOrd for Tower {
    /// `None` only if an addend is too large for the leading power to decide.
    fn partial_cmp(&self, other: &Tower) -> Option<Ordering> {
        if let (Some(a), Some(b)) = (self.to_big(), other.to_big()) {
            return Some(a.cmp(&b));
        }
        match (self, other) {
            (Tower::Pow2(h1, c1), Tower::Pow2(h2, c2)) => match h1.as_ref().partial_cmp(h2.as_ref())? {
                Ordering::Equal => Some(c1.cmp(c2)),
                Ordering::Greater => Tower::addend_small(h2, c2).then_some(Ordering::Greater),
                Ordering::Less => Tower::addend_small(h1, c1).then_some(Ordering::Less),
            },
            // one side is materializable, the other is not
            (Tower::Int(n), Tower::Pow2(h, _)) => {
                (Tower::int(n.bits()).partial_cmp(h)? != Ordering::Greater).then_some(Ordering::Less)
            }
            (Tower::Pow2(..), Tower::Int(_)) => other.partial_cmp(self).map(Ordering::reverse),
            (Tower::Int(_), Tower::Int(_)) => unreachable!("both materializable"),
        }
    }
}

impl fmt::Display for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tower::Int(n) => write!(f, "{n}"),
            Tower::Pow2(h, c) if c.is_zero() => write!(f, "2^({h})"),
            Tower::Pow2(h, c) => write!(f, "2^({h})+{c}"),
        }
    }
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for Tower {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
