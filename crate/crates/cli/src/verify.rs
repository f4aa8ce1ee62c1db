//! The invariant suite behind `microsets verify`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use microsets::construct::{gap_inequality, spacing_place, NanoScheme, NanoStage};
use microsets::procedures::{
    compact_shift, decompose_m, null_to_family, smz_merge, MergeInput, NestedRows, NullCoverInput, StageSource,
};
use microsets::witness::{
    non_ideal_demo, spacing_condition_check, DemoParams, NanoDemoParams, PicoDemoParams, SpacingReport,
};
use microsets::construct::PicoParams;
use microsets::{
    counting_certificate, greedy_cover, solve_feasible, validate_cover, BudgetList, CoverProblem, EpsilonSpec, Interval,
    IntervalSet, Numeral, PowerFamily,
};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::Format;
use crate::{Artifact, Status};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, f: impl FnOnce() -> Result<String, String>) -> Check {
    match f() {
        Ok(detail) => Check { name: name.into(), pass: true, detail },
        Err(detail) => Check { name: name.into(), pass: false, detail },
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn numerals(seed: u64) -> Result<String, String> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let n = 500;
    for _ in 0..n {
        let mut pick = || {
            let v = Numeral::from_int(2, r.gen_range(-1000..=1000i64)).map_err(err)?;
            Ok::<_, String>(v.shift(&BigInt::from(r.gen_range(-10..30i64))))
        };
        let (a, b) = (pick()?, pick()?);
        let s = &a + &b;
        ensure((&s - &b) == a, format!("({a} + {b}) − {b} ≠ {a}"))?;
        let d = &b - &a;
        ensure((a < b) == d.is_positive(), format!("order of {a} and {b} disagrees with their difference"))?;
    }
    Ok(format!("{n} add/sub/compare cases"))
}

fn nano_stages() -> Result<String, String> {
    let sch = NanoScheme::default();
    let stages: Vec<NanoStage> = (0..=2).map(|d| sch.nano_stage(d)).collect::<Result<_, _>>().map_err(err)?;
    let sizes: Vec<usize> = stages.iter().map(|s| s.set.len()).collect();
    ensure(sizes == [2, 6, 504], format!("stage sizes {sizes:?}"))?;
    for w in stages.windows(2) {
        ensure(w[0].set.covers(&w[1].set), format!("stage {} escapes stage {}", w[1].depth, w[0].depth))?;
    }
    let text = serde_json::to_string(&stages[1]).map_err(err)?;
    let back: NanoStage = serde_json::from_str(&text).map_err(err)?;
    ensure(back == stages[1], "stage 1 JSON round trip")?;
    Ok(format!("sizes {sizes:?}, nested, JSON round trip"))
}

fn gaps() -> Result<String, String> {
    let n = 64u32;
    for j in 0..n {
        let g = gap_inequality(&BigInt::from(j)).map_err(err)?;
        ensure(g.holds, format!("budget exceeds the child gap at node {j}"))?;
    }
    Ok(format!("nodes 0..{n}"))
}

fn spacing_reports() -> Result<Vec<(u64, BTreeSet<u64>, SpacingReport)>, String> {
    let host = Interval::new(Numeral::zero(13).map_err(err)?, Numeral::from_int(13, 1).map_err(err)?).map_err(err)?;
    let subsets: [&[u64]; 4] = [&[], &[1], &[2], &[1, 2]];
    let mut out = Vec::new();
    for m in 0..=2 {
        for b in subsets {
            let b: BTreeSet<u64> = b.iter().copied().collect();
            let sch = spacing_place(m, &host, &b).map_err(err)?;
            out.push((m, b, spacing_condition_check(&sch)));
        }
    }
    Ok(out)
}

/// Lengths and distances of every placement.
fn spacing_geometry() -> Result<String, String> {
    let reps = spacing_reports()?;
    for (m, b, r) in &reps {
        ensure(r.lengths_ok && r.distances_ok, format!("m = {m}, B = {b:?}"))?;
    }
    Ok(format!("{} schemes", reps.len()))
}

/// No sequence meets more than a third of a block.
fn spacing_thirds() -> Result<String, String> {
    let reps = spacing_reports()?;
    let bad: Vec<String> = reps
        .iter()
        .flat_map(|(m, b, r)| {
            r.thirds
                .iter()
                .filter(|t| !t.passes)
                .map(move |t| format!("m={m} B={b:?} block {}: {} of {}", t.b, t.total, t.block_size))
        })
        .collect();
    ensure(bad.is_empty(), bad.join("; "))?;
    Ok(format!("{} schemes", reps.len()))
}

fn solver(seed: u64) -> Result<String, String> {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = 200;
    let mut feasible = 0;
    for _ in 0..n {
        let comps = r.gen_range(1..=4usize);
        let mut ivs = Vec::new();
        let mut at = 0i64;
        for _ in 0..comps {
            at += r.gen_range(0..4i64);
            let w = r.gen_range(0..3i64);
            let lo = Numeral::from_int(2, at).map_err(err)?.shift(&BigInt::from(3));
            let hi = Numeral::from_int(2, at + w).map_err(err)?.shift(&BigInt::from(3));
            ivs.push(Interval::new(lo, hi).map_err(err)?);
            at += w + 1;
        }
        let target = IntervalSet::normalize_union(2, ivs).map_err(err)?;
        let count = r.gen_range(1..=6usize);
        let lens = (0..count)
            .map(|_| Numeral::from_power(2, r.gen_range(0..5i64)).map_err(err))
            .collect::<Result<Vec<_>, _>>()?;
        let p = CoverProblem::new(target, BudgetList::new(lens, BTreeSet::new()).map_err(err)?).map_err(err)?;
        let dp = solve_feasible(&p).map_err(err)?;
        let greedy = greedy_cover(&p);
        ensure(!greedy.feasible || dp.feasible, "greedy found a cover the solver missed")?;
        ensure(counting_certificate(&p).is_none() || !dp.feasible, "certificate contradicts a feasible verdict")?;
        if dp.feasible {
            validate_cover(&p, &dp.placement).map_err(err)?;
            feasible += 1;
        }
    }
    Ok(format!("{n} problems, {feasible} feasible"))
}

fn procedures() -> Result<String, String> {
    let half = EpsilonSpec::new(2, 1).map_err(err)?;
    let two_nano = microsets::shift_family(&PowerFamily::nano(), 2).map_err(err)?;
    let x = StageSource::nano(&NanoScheme::default(), 2).map_err(err)?;
    let s = compact_shift(&x, &two_nano, 1, &half).map_err(err)?;
    ensure(s.cover.indices().iter().all(|&i| i > 1), "shifted cover uses a low index")?;
    let stage1 = StageSource::nano(&NanoScheme::default(), 1).map_err(err)?;
    let d = decompose_m(&stage1, &PowerFamily::nano(), 2, 1).map_err(err)?;
    ensure(d.parts.len() == 2, "decomposition part count")?;
    let rows = NestedRows::rational(3, 8).map_err(err)?;
    let pt = Numeral::from_int(2, -5).map_err(err)?;
    smz_merge(&MergeInput::Case2 { rows }, &[pt], &half).map_err(err)?;
    let rep = null_to_family(&NullCoverInput::parametric(18, 4), 4, 4).map_err(err)?;
    ensure(rep.checks.all(), "parametric null-cover family checks")?;
    for seed in 0..10 {
        let rep = null_to_family(&NullCoverInput::random(seed, 4, 4), 4, 4).map_err(err)?;
        ensure(rep.checks.all(), format!("random null-cover family checks, seed {seed}"))?;
    }
    Ok("shift, decompose, merge, null family".into())
}

fn nano_demo(seed: u64) -> Result<String, String> {
    let p = NanoDemoParams { seed, candidates: 6, ..Default::default() };
    let r = non_ideal_demo(&DemoParams::Nano(p)).map_err(err)?;
    ensure(r.all_defeated(), "a nano candidate survived")?;
    Ok(format!("{} candidates defeated", r.defeats().len()))
}

fn pico_demo(seed: u64) -> Result<String, String> {
    let p = PicoDemoParams {
        scheme: PicoParams { steps: 2, index_horizon: 64, root_levels: 3 },
        banned: vec![0, 1, 2],
        seed,
        candidates: 3,
        ..Default::default()
    };
    let r = non_ideal_demo(&DemoParams::Pico(p)).map_err(err)?;
    ensure(r.all_defeated(), "a pico candidate survived or a control failed")?;
    Ok(format!("{} candidates defeated", r.defeats().len()))
}

pub fn suite(seed: u64) -> Vec<Check> {
    vec![
        check("numeral arithmetic", || numerals(seed)),
        check("nano stages", nano_stages),
        check("nano gap inequality", gaps),
        check("spacing lengths and distances", spacing_geometry),
        check("spacing one-third bound", spacing_thirds),
        check("cover solver", || solver(seed)),
        check("procedures", procedures),
        check("nano demo", || nano_demo(seed)),
        check("pico demo", || pico_demo(seed)),
    ]
}

pub fn run(seed: u64) -> Artifact {
    let checks = suite(seed);
    let mut tsv = String::from("check\tresult\tdetail\n");
    for c in &checks {
        let _ = writeln!(tsv, "{}\t{}\t{}", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail);
    }
    let all = checks.iter().all(|c| c.pass);
    let json = serde_json::json!({ "seed": seed, "passed": all, "checks": checks });
    let mut a = Artifact::new(json, tsv).with_status(if all { Status::Ok } else { Status::Invariant });
    a.default_format = Format::Tsv;
    a
}
