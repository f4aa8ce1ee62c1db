//! The 2-nanoscopic scheme: intervals `I_k` indexed by a tree where the
//! children of `I_n` are the indices `T_n = {2^(n+1), …, 2^(n+2) − 1}`.
//!
//! `|I_k| = 2^(−2^(⌊k/2⌋+1))`. The `N = 2^(n+1)` children of `I_n` start at
//! `lo(I_n) + t·(w + w/N)` with slot width `w = |I_n|/N`: uniform slots padded
//! by `1/N` of a slot, which keeps every position dyadic and makes the gap
//! between siblings exceed every budget that threatens them. The two roots
//! sit in plain half-slots of `[0,1]`. Nodes are computed lazily from their
//! index path; deep lengths stay symbolic as [`Tower`] exponents.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::numeral::Numeral;
use crate::tower::{Tower, MATERIALIZE_LIMIT};

/// Deepest stage that is ever materialized.
pub const MAX_STAGE: u32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementMode {
    /// Child `t` of `I_n` starts at `lo + t·(w + w/N)`, `w = |I_n|/N`.
    #[default]
    UniformSlot,
    /// Equal gaps where they are dyadic (two children: flush to both ends),
    /// padded slots elsewhere.
    ExactStage,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NanoScheme {
    pub mode: PlacementMode,
}

/// `f(k) = 2^(i+1)` for `k ∈ T_i`.
pub fn nano_f(k: &BigInt) -> BigInt {
    BigInt::one() << (level(k) + 1) as u64
}

/// The `i` with `k ∈ T_i`; `−1` for `k ∈ {0, 1}`.
pub fn level(k: &BigInt) -> i64 {
    if k < &BigInt::from(2) {
        -1
    } else {
        k.bits() as i64 - 2
    }
}

/// Index whose children include `k`; `None` for the two roots.
pub fn parent_index(k: &BigInt) -> Option<BigInt> {
    match level(k) {
        -1 => None,
        i => Some(BigInt::from(i)),
    }
}

/// Half-open index range `T_i`.
pub fn t_range(i: i64) -> Result<(BigInt, BigInt)> {
    match i {
        -1 => Ok((BigInt::zero(), BigInt::from(2))),
        i if i >= 0 && (i as u64) < MATERIALIZE_LIMIT => {
            Ok((BigInt::one() << (i + 1) as u64, BigInt::one() << (i + 2) as u64))
        }
        _ => Err(Error::InvalidParameter(format!("T_{i} is not representable"))),
    }
}

fn children_range(parent: Option<&BigInt>) -> Result<(BigInt, BigInt)> {
    match parent {
        None => t_range(-1),
        Some(n) => match n.to_i64() {
            Some(i) => t_range(i),
            None => Err(Error::HorizonExceeded(format!("children of node {n}"))),
        },
    }
}

/// `S_0 = T_{−1}`, `S_{i+1} = ⋃_{j∈S_i} T_j`.
pub fn s_set(i: u32) -> Result<Vec<BigInt>> {
    if i > MAX_STAGE {
        return Err(Error::DepthLimit { depth: i as usize, limit: MAX_STAGE as usize });
    }
    let mut cur: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for _ in 0..i {
        let mut next = Vec::new();
        for j in &cur {
            let (a, b) = t_range(j.to_i64().expect("small stage index"))?;
            let mut k = a;
            while k < b {
                next.push(k.clone());
                k += 1;
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// `⌊k/2⌋ + 1`, so that `|I_k| = 2^(−2^that)`.
fn loglog(k: &BigInt) -> BigInt {
    (k >> 1u32) + 1
}

/// Exponent `e` with `|I_k| = 2^(−e)`.
pub fn length_exponent(k: &BigInt) -> Tower {
    Tower::pow2(Tower::Int(loglog(k)))
}

/// Exponent of the slot width `|I_n| / 2^(n+1)` inside `I_n`; the ambient
/// `[0,1]` has two slots of width `1/2`.
pub fn slot_exponent(parent: Option<&BigInt>) -> Tower {
    match parent {
        None => Tower::int(1),
        Some(n) => length_exponent(n).plus(&(n + 1)),
    }
}

/// Exponent of the length of the first (largest) child of `I_j`:
/// `2^(2^j + 1)`, built without materializing `2^(j+1)`.
fn first_child_exponent(j: &BigInt) -> Tower {
    Tower::pow2(Tower::pow2(Tower::Int(j.clone())).plus(&BigInt::one()))
}

/// Index path from a root down to a node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPath", into = "RawPath")]
pub struct NodeRef {
    path: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct RawPath(#[serde(with = "crate::serde_big::vec")] Vec<BigInt>);

impl TryFrom<RawPath> for NodeRef {
    type Error = Error;
    fn try_from(r: RawPath) -> Result<Self> {
        NodeRef::from_path(r.0)
    }
}

impl From<NodeRef> for RawPath {
    fn from(n: NodeRef) -> Self {
        RawPath(n.path)
    }
}

impl NodeRef {
    pub fn from_path(path: Vec<BigInt>) -> Result<Self> {
        let Some(first) = path.first() else {
            return Err(Error::InvalidParameter("empty node path".into()));
        };
        if level(first) != -1 || first.sign() == num_bigint::Sign::Minus {
            return Err(Error::InvalidParameter(format!("{first} is not a root index")));
        }
        for w in path.windows(2) {
            if parent_index(&w[1]).as_ref() != Some(&w[0]) {
                return Err(Error::NotAChild { parent: w[0].to_string(), index: w[1].to_string() });
            }
        }
        Ok(NodeRef { path })
    }

    /// Path recovered from the index alone: the parent of `k ∈ T_n` is `n`.
    pub fn from_index(k: BigInt) -> Result<Self> {
        if k.sign() == num_bigint::Sign::Minus {
            return Err(Error::InvalidParameter(format!("negative index {k}")));
        }
        let mut path = vec![k];
        while let Some(p) = parent_index(path.last().expect("nonempty")) {
            path.push(p);
        }
        path.reverse();
        Ok(NodeRef { path })
    }

    pub fn index(&self) -> &BigInt {
        self.path.last().expect("nonempty path")
    }

    pub fn path(&self) -> &[BigInt] {
        &self.path
    }

    /// Number of nodes strictly above this one.
    pub fn depth(&self) -> usize {
        self.path.len() - 1
    }

    pub fn parent(&self) -> Option<NodeRef> {
        (self.path.len() > 1).then(|| NodeRef { path: self.path[..self.path.len() - 1].to_vec() })
    }

    pub fn child(&self, k: BigInt) -> Result<NodeRef> {
        if parent_index(&k).as_ref() != Some(self.index()) {
            return Err(Error::NotAChild { parent: self.index().to_string(), index: k.to_string() });
        }
        let mut path = self.path.clone();
        path.push(k);
        Ok(NodeRef { path })
    }

    /// Uniformly random chain `K_0 ⊃ … ⊃ K_depth`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> Result<NodeRef> {
        let mut node = NodeRef { path: vec![BigInt::from(rng.gen_range(0..2u8))] };
        for _ in 0..depth {
            let (lo, hi) = children_range(Some(node.index()))?;
            let bits = (&hi - &lo).bits() - 1;
            node = node.child(lo + random_bits(rng, bits))?;
        }
        Ok(node)
    }
}

fn random_bits<R: Rng + ?Sized>(rng: &mut R, bits: u64) -> BigInt {
    let mut bytes = vec![0u8; bits.div_ceil(8) as usize];
    rng.fill(&mut bytes[..]);
    let v = BigInt::from_bytes_le(num_bigint::Sign::Plus, &bytes);
    v & ((BigInt::one() << bits) - 1)
}

/// Position and (possibly symbolic) length of one node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NanoNode {
    pub node: NodeRef,
    pub lo: Numeral,
    /// `|I_k| = 2^(−len_exp)`.
    pub len_exp: Tower,
    /// Padded slots were used where exact-stage placement was requested.
    pub fallback: bool,
}

impl NanoNode {
    pub fn index(&self) -> &BigInt {
        self.node.index()
    }

    pub fn length(&self) -> Option<Numeral> {
        let e = self.len_exp.to_big()?;
        Some(Numeral::from_power(2, e).expect("base 2"))
    }

    pub fn interval(&self) -> Result<Interval> {
        let len = self
            .length()
            .ok_or_else(|| Error::HorizonExceeded(format!("length of I_{} is not materializable", self.index())))?;
        Interval::with_length(self.lo.clone(), &len)
    }

    /// Closed intersection test that also works when the length is symbolic:
    /// any nonzero numeral exceeds an unmaterializable power `2^(−e)`.
    pub fn meets(&self, j: &Interval) -> bool {
        if j.hi() < &self.lo {
            return false;
        }
        match self.length() {
            Some(len) => j.lo() <= &(&self.lo + &len),
            None => j.lo() <= &self.lo,
        }
    }
}

impl NanoScheme {
    pub fn new(mode: PlacementMode) -> Self {
        NanoScheme { mode }
    }

    pub fn ambient(&self) -> Interval {
        Interval::new(Numeral::zero(2).expect("base 2"), Numeral::from_int(2, 1).expect("base 2")).expect("ordered")
    }

    /// Child `k` of `parent` (`None` = ambient `[0,1]`).
    pub fn child_of(&self, parent: Option<&NanoNode>, k: &BigInt) -> Result<NanoNode> {
        let pidx = parent.map(|p| p.index());
        let (first, end) = children_range(pidx)?;
        if k < &first || k >= &end {
            return Err(Error::NotAChild {
                parent: pidx.map_or_else(|| "ambient".to_string(), |p| p.to_string()),
                index: k.to_string(),
            });
        }
        let slot_exp = slot_exponent(pidx);
        // siblings are disjoint: the first child is the longest
        let first_len = length_exponent(&first);
        if first_len.partial_cmp(&slot_exp) != Some(Ordering::Greater) {
            return Err(Error::Precondition(format!("child {first} does not fit its slot")));
        }
        let slot = slot_exp
            .to_big()
            .ok_or_else(|| Error::HorizonExceeded(format!("slot width inside node {}", pidx.expect("root slots are small"))))?;
        let t = k - &first;
        let n_children = &end - &first;
        let plo = match parent {
            Some(p) => p.lo.clone(),
            None => Numeral::zero(2)?,
        };
        let offset = |t: &BigInt| -> Result<Numeral> {
            let base = Numeral::from_int(2, t.clone())?;
            Ok(match pidx {
                None => base.shift(&slot),
                Some(n) => {
                    // last child ends inside the parent: |last| ≤ |I_n|/N²
                    let pad: BigInt = &slot + n + 1;
                    let last = Tower::pow2(Tower::pow2(Tower::Int(n + 1)));
                    if last.partial_cmp(&Tower::Int(pad.clone())) == Some(Ordering::Less) {
                        return Err(Error::Precondition(format!("children of node {n} overflow it")));
                    }
                    &base.shift(&slot) + &base.shift(&pad)
                }
            })
        };
        let two = BigInt::from(2);
        let (lo, fallback) = match self.mode {
            PlacementMode::ExactStage if n_children == two && t.is_one() => {
                let phi = match parent {
                    Some(p) => p.interval()?.hi().clone(),
                    None => Numeral::from_int(2, 1)?,
                };
                let e = length_exponent(k).to_big().ok_or_else(|| Error::HorizonExceeded(format!("length of I_{k}")))?;
                (&phi - &Numeral::from_power(2, e)?, false)
            }
            PlacementMode::ExactStage => (&plo + &offset(&t)?, n_children > two),
            PlacementMode::UniformSlot => (&plo + &offset(&t)?, false),
        };
        let node = match parent {
            Some(p) => p.node.child(k.clone())?,
            None => NodeRef { path: vec![k.clone()] },
        };
        Ok(NanoNode { node, lo, len_exp: length_exponent(k), fallback: fallback || parent.is_some_and(|p| p.fallback) })
    }

    pub fn node(&self, r: &NodeRef) -> Result<NanoNode> {
        let mut cur: Option<NanoNode> = None;
        for k in r.path() {
            cur = Some(self.child_of(cur.as_ref(), k)?);
        }
        Ok(cur.expect("nonempty path"))
    }

    /// Materialized child interval of `parent`.
    pub fn nano_child(&self, parent: &NodeRef, k: &BigInt) -> Result<Interval> {
        let p = self.node(parent)?;
        self.child_of(Some(&p), k)?.interval()
    }

    /// Children of `parent` meeting `j`, in index order, at most `cap` of them.
    ///
    /// Child right ends increase with the slot index, so the first candidate
    /// is found by binary search.
    pub fn children_meeting(&self, parent: Option<&NanoNode>, j: &Interval, cap: usize) -> Result<Vec<BigInt>> {
        let (first, end) = children_range(parent.map(|p| p.index()))?;
        // smallest child whose right end reaches j.lo
        let (mut lo, mut hi) = (first.clone(), end.clone());
        while lo < hi {
            let mid: BigInt = (&lo + &hi) >> 1u32;
            let c = self.child_of(parent, &mid)?;
            let reaches = match c.length() {
                Some(len) => &c.lo + &len >= *j.lo(),
                // a symbolic length is below every nonzero numeral
                None => c.lo >= *j.lo(),
            };
            if reaches {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let mut out = Vec::new();
        let mut k = lo;
        while k < end && out.len() < cap {
            let c = self.child_of(parent, &k)?;
            if c.lo > *j.hi() {
                break;
            }
            if c.meets(j) {
                out.push(k.clone());
            }
            k += 1;
        }
        Ok(out)
    }

    /// `X_depth = ⋃_{k∈S_depth} I_k`, materialized.
    pub fn nano_stage(&self, depth: u32) -> Result<NanoStage> {
        if depth > MAX_STAGE {
            return Err(Error::DepthLimit { depth: depth as usize, limit: MAX_STAGE as usize });
        }
        let mut layer: Vec<NanoNode> =
            vec![self.child_of(None, &BigInt::zero())?, self.child_of(None, &BigInt::one())?];
        for _ in 0..depth {
            let mut next = Vec::new();
            for p in &layer {
                let (a, b) = children_range(Some(p.index()))?;
                let mut k = a;
                while k < b {
                    next.push(self.child_of(Some(p), &k)?);
                    k += 1;
                }
            }
            layer = next;
        }
        let fallback = layer.iter().any(|n| n.fallback);
        let mut labeled = layer
            .iter()
            .map(|n| Ok((n.interval()?, n.index().clone())))
            .collect::<Result<Vec<_>>>()?;
        labeled.sort_by(|a, b| a.0.lo().partial_cmp(b.0.lo()).unwrap_or(Ordering::Equal));
        let set = IntervalSet::normalize_union(2, labeled.iter().map(|(iv, _)| iv.clone()).collect())?;
        if set.len() != labeled.len() {
            return Err(Error::Precondition(format!("stage {depth} intervals are not pairwise disjoint")));
        }
        Ok(NanoStage { depth, set, labels: labeled.into_iter().map(|(_, k)| k).collect(), uniform_fallback: fallback })
    }
}

/// A materialized stage with the index of each component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NanoStage {
    pub depth: u32,
    pub set: IntervalSet,
    /// `labels[c]` is the index of component `c`.
    #[serde(with = "crate::serde_big::vec")]
    pub labels: Vec<BigInt>,
    pub uniform_fallback: bool,
}

/// The inequality the adversary argument needs at node `I_j` for `ε = 1/4`:
/// every budget `(1/4)^(2^i) = 2^(−2^(i+1))` with `i ≥ f(j)` is below the
/// smallest gap between children of `I_j`, so each such budget meets at most
/// one child.
///
/// The smallest gap is `2^(−s) + 2^(−(s+j+1)) − 2^(−c)` for slot exponent
/// `s` and first-child exponent `c`; the worst budget is `2^(−b)`,
/// `b = 2^(f(j)+1)`. Small cases are compared as numerals. When `c` is too
/// large to hold, `c > s+j+1` makes the gap lie strictly between `2^(−s)` and
/// `2^(−s+1)`, so a power of two is below it iff `b ≥ s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapCheck {
    #[serde(with = "crate::serde_big")]
    pub node: BigInt,
    pub budget_exp: Tower,
    pub slot_exp: Tower,
    pub first_child_exp: Tower,
    /// `budget ≤ gap`
    pub holds: bool,
    /// `budget < gap`
    pub strict: bool,
}

pub fn gap_inequality(j: &BigInt) -> Result<GapCheck> {
    let budget_exp = Tower::pow2(Tower::Int(nano_f(j) + 1));
    let slot_exp = slot_exponent(Some(j));
    let first_child_exp = first_child_exponent(j);
    let undecided = || Error::Precondition(format!("exponent comparison undecided at node {j}"));
    let (holds, strict) = match (budget_exp.to_big(), slot_exp.to_big(), first_child_exp.to_big()) {
        (Some(b), Some(s), Some(c)) => {
            let p = |e: &BigInt| Numeral::from_power(2, e.clone()).expect("base 2");
            let gap = &(&p(&s) + &p(&(&s + j + 1))) - &p(&c);
            let budget = p(&b);
            (budget <= gap, budget < gap)
        }
        _ => {
            let pad = slot_exp.clone().plus(&(j + 1));
            if first_child_exp.partial_cmp(&pad).ok_or_else(undecided)? != Ordering::Greater {
                return Err(undecided());
            }
            let ok = budget_exp.partial_cmp(&slot_exp).ok_or_else(undecided)? != Ordering::Less;
            (ok, ok)
        }
    };
    Ok(GapCheck { node: j.clone(), budget_exp, slot_exp, first_child_exp, holds, strict })
}
