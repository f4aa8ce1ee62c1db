//! The picoscopic scheme at `ε = 1/13`: intervals `I^n_k` with
//! `|I^n_k| = ε_n^((k+1)!)`, `ε_n = 13^(−(n+1)!)`, so the length exponent
//! is `(n+1)!·(k+1)!`.
//!
//! The roots `I^n_k`, `k < h(n)`, sit at `3c/13` for their ordinal `c` in
//! `(n, k)` order. Step `m` refines every cell `(n, k) ∈ T_m` by a spacing
//! placement over its block set `B(n, k)`, producing the nodes `I^m_j`,
//! `j ∈ F(B(n, k))`.
//!
//! Only finitely many blocks exist below the index horizon, so the
//! partition of blocks into cells is finite: block `b` goes round-robin to
//! cell `(b − k_m) mod |T_m|`, or to the lowest cell long enough for it.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::construct::spacing::{spacing_place, BASE};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::numeral::{factorial, Numeral};

/// `(level, index)` of a node `I^level_index`.
pub type PicoRef = (u32, u64);

/// The distinguished point added to `X`.
pub fn pico_point() -> Numeral {
    Numeral::from_int(BASE, -1).expect("base 13")
}

/// Least `k` with `4^k > (n+1)!`.
pub fn k_n(n: u32) -> u32 {
    let f = factorial(n as u64 + 1);
    let mut k = 0u32;
    while BigInt::from(4).pow(k) <= f {
        k += 1;
    }
    k
}

/// `h(n) = 4^(k_n)`.
pub fn h(n: u32) -> u64 {
    4u64.checked_pow(k_n(n)).expect("h(n) fits for desk-scale n")
}

/// `(n+1)!·(k+1)!`, so that `|I^n_k| = 13^(−exp)`.
pub fn node_exponent(n: u32, k: u64) -> BigInt {
    factorial(n as u64 + 1) * factorial(k + 1)
}

/// The refinement step of a node at level `i` inside a root of level `n`.
pub fn g_rule(i: u32, n: u32) -> u32 {
    if i == n {
        if n == 0 {
            1
        } else {
            0
        }
    } else if i + 1 == n {
        n + 1
    } else {
        i + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicoParams {
    /// Steps `0..steps` are built.
    pub steps: u32,
    /// Blocks `b` are used only when all of `F({b})` lies below this index.
    pub index_horizon: u64,
    /// Roots exist for levels `0..root_levels`.
    pub root_levels: u32,
}

impl Default for PicoParams {
    fn default() -> Self {
        PicoParams { steps: 2, index_horizon: 1024, root_levels: 5 }
    }
}

impl PicoParams {
    /// Largest usable block.
    pub fn max_block(&self) -> Option<u64> {
        (0..32u64).take_while(|&b| 4u64.pow(b as u32 + 1) <= self.index_horizon).last()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicoNode {
    pub level: u32,
    pub index: u64,
    pub interval: Interval,
    pub parent: Option<PicoRef>,
    pub root: PicoRef,
    /// Step that refines this node, when it lies within the horizon.
    pub refined_at: Option<u32>,
    pub blocks: BTreeSet<u64>,
    /// Scaffold level `L` of the spacing placement inside this node.
    pub scaffold_level: Option<u64>,
    /// Child indices, at level `refined_at`.
    pub children: Vec<u64>,
}

impl PicoNode {
    pub fn key(&self) -> PicoRef {
        (self.level, self.index)
    }

    pub fn label(&self) -> String {
        format!("I^{}_{}", self.level, self.index)
    }

    pub fn is_root(&self) -> bool {
        self.parent.is_none()
    }
}

/// Blocks that found no cell long enough for them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unassigned {
    pub step: u32,
    pub block: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicoScheme {
    pub params: PicoParams,
    nodes: BTreeMap<PicoRef, PicoNode>,
    /// `cells[m]` is `T_m` in canonical order.
    pub cells: Vec<Vec<PicoRef>>,
    pub unassigned: Vec<Unassigned>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicoStage {
    pub level: u32,
    pub set: IntervalSet,
    /// `labels[c]` is the index `j` of component `c`, i.e. `I^level_j`.
    pub labels: Vec<u64>,
}

impl PicoScheme {
    pub fn new(params: PicoParams) -> Result<Self> {
        if params.root_levels == 0 || params.root_levels > 6 {
            return Err(Error::InvalidParameter(format!("root levels must be in 1..=6, got {}", params.root_levels)));
        }
        if params.steps > 4 {
            return Err(Error::HorizonExceeded(format!("{} steps", params.steps)));
        }
        let mut sch = PicoScheme { params, nodes: BTreeMap::new(), cells: Vec::new(), unassigned: Vec::new() };
        sch.place_roots()?;
        for m in 0..sch.params.steps {
            sch.run_step(m)?;
        }
        Ok(sch)
    }

    fn place_roots(&mut self) -> Result<()> {
        let mut c = 0u64;
        for n in 0..self.params.root_levels {
            for k in 0..h(n) {
                let lo = Numeral::from_int(BASE, 3 * c)?.shift(&BigInt::from(1));
                let len = Numeral::from_power(BASE, node_exponent(n, k))?;
                let node = PicoNode {
                    level: n,
                    index: k,
                    interval: Interval::with_length(lo, &len)?,
                    parent: None,
                    root: (n, k),
                    refined_at: None,
                    blocks: BTreeSet::new(),
                    scaffold_level: None,
                    children: Vec::new(),
                };
                self.nodes.insert((n, k), node);
                c += 1;
            }
        }
        Ok(())
    }

    fn root_level_of(&self, key: PicoRef) -> u32 {
        self.nodes[&key].root.0
    }

    /// `T_m` as defined by the two-branch rule, in canonical order.
    fn cells_for(&self, m: u32) -> Vec<PicoRef> {
        // a node lies inside its root, and roots are pairwise disjoint, so a
        // node meets some root of level l iff its own root has level l
        let inside_level = |key: &PicoRef, l: u32| self.root_level_of(*key) == l;
        let mut out: Vec<PicoRef> = match m {
            0 => self.nodes.keys().filter(|&&(n, k)| n > 0 && k < h(n)).copied().collect(),
            1 => self.nodes.keys().filter(|&&(n, _)| n == 0).filter(|key| !inside_level(key, 1)).copied().collect(),
            _ => {
                let a = self
                    .nodes
                    .keys()
                    .filter(|&&(n, k)| n == m - 1 && k >= h(m - 1))
                    .filter(|key| !inside_level(key, m));
                let b = self.nodes.keys().filter(|&&(n, _)| n == m - 2).filter(|key| inside_level(key, m - 1));
                a.chain(b).copied().collect()
            }
        };
        out.sort();
        out
    }

    /// `|I^n_k| ≥ 13·13^(−(4^b+1)!)`.
    fn admits(&self, key: PicoRef, b: u64) -> bool {
        let lhs = node_exponent(key.0, key.1);
        lhs < factorial(4u64.pow(b as u32) + 1)
    }

    fn run_step(&mut self, m: u32) -> Result<()> {
        let cells = self.cells_for(m);
        let mut blocks: BTreeMap<PicoRef, BTreeSet<u64>> = BTreeMap::new();
        if let (Some(bmax), false) = (self.params.max_block(), cells.is_empty()) {
            for b in k_n(m) as u64..=bmax {
                let pref = cells[((b - k_n(m) as u64) % cells.len() as u64) as usize];
                let target = if self.admits(pref, b) { Some(pref) } else { cells.iter().copied().find(|&c| self.admits(c, b)) };
                match target {
                    Some(c) => {
                        blocks.entry(c).or_default().insert(b);
                    }
                    None => self.unassigned.push(Unassigned { step: m, block: b }),
                }
            }
        }
        for (cell, bs) in blocks {
            let host = self.nodes[&cell].interval.clone();
            let root = self.nodes[&cell].root;
            let sp = spacing_place(m as u64, &host, &bs)?;
            let mut kids = Vec::with_capacity(sp.placements.len());
            for p in sp.placements {
                let key = (m, p.index);
                if self.nodes.contains_key(&key) {
                    return Err(Error::InvalidParameter(format!("I^{m}_{} placed twice", p.index)));
                }
                kids.push(p.index);
                self.nodes.insert(
                    key,
                    PicoNode {
                        level: m,
                        index: p.index,
                        interval: p.interval,
                        parent: Some(cell),
                        root,
                        refined_at: None,
                        blocks: BTreeSet::new(),
                        scaffold_level: None,
                        children: Vec::new(),
                    },
                );
            }
            let node = self.nodes.get_mut(&cell).expect("cell exists");
            node.blocks = bs;
            node.scaffold_level = Some(sp.l);
            node.children = kids;
        }
        for &cell in &cells {
            self.nodes.get_mut(&cell).expect("cell exists").refined_at = Some(m);
        }
        self.cells.push(cells);
        Ok(())
    }

    pub fn node(&self, key: PicoRef) -> Option<&PicoNode> {
        self.nodes.get(&key)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &PicoNode> {
        self.nodes.values()
    }

    /// Nodes of level `i`, by index.
    pub fn level(&self, i: u32) -> impl Iterator<Item = &PicoNode> {
        self.nodes.range((i, 0)..=(i, u64::MAX)).map(|(_, v)| v)
    }

    pub fn roots(&self, n: u32) -> impl Iterator<Item = &PicoNode> {
        self.level(n).filter(|v| v.is_root())
    }

    pub fn children(&self, node: &PicoNode) -> Vec<&PicoNode> {
        match node.refined_at {
            Some(m) => node.children.iter().map(|&c| &self.nodes[&(m, c)]).collect(),
            None => Vec::new(),
        }
    }

    /// `g(i, j)`, from the level of the root containing `I^i_j`.
    pub fn g(&self, key: PicoRef) -> Option<u32> {
        self.nodes.get(&key).map(|v| g_rule(key.0, v.root.0))
    }

    /// `X_i` truncated at the horizon: the union of all level-`i` nodes.
    pub fn pico_stage(&self, i: u32) -> Result<PicoStage> {
        let nodes: Vec<&PicoNode> = self.level(i).collect();
        if nodes.is_empty() {
            return Err(Error::HorizonExceeded(format!("no level-{i} intervals within the horizon")));
        }
        let mut sorted: Vec<(&Numeral, u64, Interval)> = nodes.iter().map(|v| (v.interval.lo(), v.index, v.interval.clone())).collect();
        sorted.sort_by(|a, b| a.0.partial_cmp(b.0).expect("same base"));
        let labels = sorted.iter().map(|t| t.1).collect();
        let set = IntervalSet::normalize_union(BASE, sorted.into_iter().map(|t| t.2).collect())?;
        if set.len() != nodes.len() {
            return Err(Error::InvalidParameter(format!("level-{i} intervals overlap")));
        }
        Ok(PicoStage { level: i, set, labels })
    }
}

impl Default for PicoScheme {
    fn default() -> Self {
        PicoScheme::new(PicoParams::default()).expect("default parameters are valid")
    }
}
