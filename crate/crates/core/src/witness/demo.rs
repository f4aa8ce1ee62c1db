//! End-to-end runs of the two "not an ideal" arguments at desk scale.
//!
//! Nano: the 2-nano set splits into two parts with validated nano covers,
//! while candidate covers of the whole set are defeated by the adversary.
//! Pico: the level stages are validated pico covers of `X`, while covers
//! of `X ∪ {−1}` that must spend a budget on the point (index `N` withheld)
//! are defeated.

use serde::{Deserialize, Serialize};

use crate::budget::{EpsilonSpec, PowerFamily};
use crate::construct::nano::NanoScheme;
use crate::construct::pico::{pico_point, PicoParams, PicoScheme};
use crate::cover::{validate_labeled, LabeledCover};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::numeral::factorial;
use crate::procedures::{decompose_m, intersect, PartCover, StageSource};
use crate::witness::chain::verify_chain;
use crate::witness::nano::{nano_candidates, nano_witness_chain};
use crate::witness::pico::{covers_point, pico_budget, pico_candidates, pico_witness_chain};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NanoDemoParams {
    /// Deepest nano stage used as the set.
    pub stage: u32,
    /// `ε = 2^(−t)` for each listed `t ≥ 1`.
    pub eps: Vec<u64>,
    pub seed: u64,
    pub candidates: usize,
    pub budgets: usize,
    pub chain_depth: usize,
}

impl Default for NanoDemoParams {
    fn default() -> Self {
        NanoDemoParams { stage: 1, eps: vec![1, 2], seed: 0, candidates: 12, budgets: 16, chain_depth: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicoDemoParams {
    pub scheme: PicoParams,
    /// Withheld indices `N` to try.
    pub banned: Vec<usize>,
    pub seed: u64,
    pub candidates: usize,
    pub budgets: usize,
    pub chain_depth: usize,
}

impl Default for PicoDemoParams {
    fn default() -> Self {
        PicoDemoParams {
            scheme: PicoParams::default(),
            banned: (0..=4).collect(),
            seed: 0,
            candidates: 50,
            budgets: 16,
            chain_depth: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DemoParams {
    Nano(NanoDemoParams),
    Pico(PicoDemoParams),
}

/// A validated cover of one part of the decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartCertificate {
    pub part: usize,
    pub stage: IntervalSet,
    pub covers: Vec<PartCover>,
}

/// A validated cover of `X` by one level of the pico scheme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCertificate {
    pub level: u32,
    pub eps: EpsilonSpec,
    pub cover: LabeledCover,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defeat {
    pub seed: u64,
    pub source: String,
    /// Withheld index, pico only.
    pub banned: Option<usize>,
    pub defeated: bool,
    pub verified: bool,
    pub chain: Vec<String>,
    /// Pico control: the point is uncovered as given and covered once `J_N`
    /// is put on it.
    pub control_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DemoReport {
    Nano { cuts: Vec<u64>, parts: Vec<PartCertificate>, defeats: Vec<Defeat> },
    Pico { levels: Vec<LevelCertificate>, defeats: Vec<Defeat> },
}

impl DemoReport {
    pub fn defeats(&self) -> &[Defeat] {
        match self {
            DemoReport::Nano { defeats, .. } | DemoReport::Pico { defeats, .. } => defeats,
        }
    }

    /// Every candidate defeated with a verified chain, every control as expected.
    pub fn all_defeated(&self) -> bool {
        self.defeats().iter().all(|d| d.defeated && d.verified && d.control_ok != Some(false))
    }
}

pub fn non_ideal_demo(params: &DemoParams) -> Result<DemoReport> {
    match params {
        DemoParams::Nano(p) => nano_demo(p),
        DemoParams::Pico(p) => pico_demo(p),
    }
}

fn nano_demo(p: &NanoDemoParams) -> Result<DemoReport> {
    let sch = NanoScheme::default();
    let mut cuts = Vec::new();
    let mut parts = Vec::new();
    if let Some(&max_t) = p.eps.iter().max() {
        if p.eps.contains(&0) {
            return Err(Error::InvalidParameter("ε = 2^(−t) needs t ≥ 1".into()));
        }
        let src = StageSource::nano(&sch, p.stage)?;
        let dec = decompose_m(&src, &PowerFamily::nano(), 2, (max_t - 1) as u32)?;
        for (j, stage) in dec.parts.iter().enumerate() {
            let covers: Vec<PartCover> = p.eps.iter().map(|&t| dec.part_covers[j][(t - 1) as usize].clone()).collect();
            for c in &covers {
                validate_labeled(stage, &PowerFamily::nano(), &c.eps, &c.cover)?;
            }
            parts.push(PartCertificate { part: j, stage: stage.clone(), covers });
        }
        cuts = dec.cuts;
    }
    let mut defeats = Vec::with_capacity(p.candidates);
    for c in nano_candidates(&sch, p.seed, p.candidates, p.budgets)? {
        let (defeated, verified, chain) = match nano_witness_chain(&sch, &c.placed, p.chain_depth) {
            Ok(w) => {
                let ok = verify_chain(&w, &c.placed).is_ok();
                (true, ok, w.steps.iter().map(|s| s.label.clone()).collect())
            }
            Err(_) => (false, false, Vec::new()),
        };
        defeats.push(Defeat { seed: c.seed, source: c.source, banned: None, defeated, verified, chain, control_ok: None });
    }
    Ok(DemoReport::Nano { cuts, parts, defeats })
}

fn pico_demo(p: &PicoDemoParams) -> Result<DemoReport> {
    let sch = PicoScheme::new(p.scheme.clone())?;
    let stages: Vec<(u32, IntervalSet, Vec<u64>)> = (0..p.scheme.root_levels)
        .filter_map(|i| sch.pico_stage(i).ok().map(|s| (i, s.set, s.labels)))
        .collect();
    // X at the horizon: the meet of all level stages
    let mut target = stages.first().map(|s| s.1.clone()).ok_or_else(|| Error::HorizonExceeded("no pico levels".into()))?;
    for s in &stages[1..] {
        target = intersect(&target, &s.1)?;
    }
    let fam = PowerFamily::pico();
    let mut levels = Vec::with_capacity(stages.len());
    for (i, _, _) in &stages {
        let eps = EpsilonSpec::new(13, factorial(*i as u64 + 1))?;
        let mut cover = LabeledCover::default();
        for v in sch.level(*i) {
            cover.push(v.index, v.interval.clone());
        }
        cover.sort();
        validate_labeled(&target, &fam, &eps, &cover)?;
        levels.push(LevelCertificate { level: *i, eps, cover });
    }

    let mut defeats = Vec::new();
    for &n in &p.banned {
        for c in pico_candidates(&sch, n, p.seed, p.candidates, p.budgets)? {
            let w = pico_witness_chain(&sch, &c.placed, n, p.chain_depth)?;
            let chain = w.outcome.chain();
            let verified = verify_chain(chain, &c.placed).is_ok();
            let mut with_point = c.placed.clone();
            if with_point.len() <= n {
                with_point.resize(n + 1, None);
            }
            with_point[n] = Some(Interval::with_length(pico_point(), &pico_budget(n))?);
            let control_ok = !covers_point(&c.placed) && covers_point(&with_point);
            defeats.push(Defeat {
                seed: c.seed,
                source: c.source,
                banned: Some(n),
                defeated: w.outcome.is_defeated(),
                verified,
                chain: chain.steps.iter().map(|s| s.label.clone()).collect(),
                control_ok: Some(control_ok),
            });
        }
    }
    Ok(DemoReport::Pico { levels, defeats })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nano_two_parts_and_defeats() {
        let r = non_ideal_demo(&DemoParams::Nano(NanoDemoParams { candidates: 4, ..Default::default() })).unwrap();
        let DemoReport::Nano { parts, defeats, .. } = &r else { panic!() };
        assert_eq!(parts.len(), 2);
        assert!(parts.iter().all(|p| p.covers.len() == 2));
        assert!(!defeats.is_empty());
        assert!(r.all_defeated());
    }

    #[test]
    fn nano_without_eps() {
        let r = non_ideal_demo(&DemoParams::Nano(NanoDemoParams { eps: vec![], candidates: 2, ..Default::default() })).unwrap();
        let DemoReport::Nano { parts, defeats, .. } = &r else { panic!() };
        assert!(parts.is_empty());
        assert_eq!(defeats.len(), 2);
    }

    #[test]
    fn pico_levels_and_defeats() {
        let params = PicoDemoParams {
            scheme: PicoParams { steps: 2, index_horizon: 64, root_levels: 3 },
            banned: vec![1],
            candidates: 3,
            ..Default::default()
        };
        let r = non_ideal_demo(&DemoParams::Pico(params)).unwrap();
        let DemoReport::Pico { levels, defeats } = &r else { panic!() };
        assert_eq!(levels.len(), 3);
        assert_eq!(defeats.len(), 3);
        assert!(r.all_defeated());
    }
}
