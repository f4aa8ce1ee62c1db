use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use microsets::construct::{
    rational_cover_stage, spacing_place, GdeltaRationalScheme, NanoScheme, NodeRef, PicoScheme,
};
use microsets::cover::LabeledCover;
use microsets::procedures::{
    compact_shift, decompose_m, null_to_family, sigma_union_cover, smz_merge, CoverSource, MergeInput, NestedRows,
    NullCoverInput, StageSource,
};
use microsets::witness::nano::Candidate;
use microsets::witness::{
    nano_candidates, nano_witness_chain, non_ideal_demo, pico_candidates, pico_witness_chain, spacing_condition_check,
    verify_chain, DemoParams, DemoReport, NanoDemoParams, PicoDemoParams,
};
use microsets::{
    greedy_cover, solve_feasible, validate_cover, BudgetList, CoverProblem, EpsilonSpec, Interval, IntervalSet, Numeral,
    PowerFamily,
};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::args::*;
use crate::{verify, Artifact, Status};

pub fn dispatch(cmd: &Command) -> Result<Artifact> {
    match cmd {
        Command::Construct(a) => construct(a),
        Command::Cover(a) => cover(a),
        Command::Transform(a) => transform(a),
        Command::Witness(a) => witness(a),
        Command::Demo(a) => demo(a),
        Command::Verify(a) => Ok(verify::run(a.seed)),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn family(spec: &str) -> Result<PowerFamily> {
    Ok(PowerFamily::parse(spec)?)
}

/// Exponent `e` of a length `base^(−e)`; the leading exponent when the
/// length is not a pure power.
fn exponent(len: &Numeral) -> String {
    match len.as_power().or_else(|| len.leading_exponent()) {
        Some(e) => e.to_string(),
        None => "inf".into(),
    }
}

fn exponent_table<'a>(rows: impl IntoIterator<Item = (String, &'a Interval)>) -> String {
    let mut s = String::from("index\texponent\n");
    for (i, iv) in rows {
        let _ = writeln!(s, "{i}\t{}", exponent(&iv.length()));
    }
    s
}

fn cover_table(cover: &LabeledCover) -> String {
    exponent_table(cover.entries.iter().map(|e| (e.index.to_string(), &e.interval)))
}

fn construct(a: &ConstructArgs) -> Result<Artifact> {
    match a.scheme {
        SchemeKind::Nano => {
            let sch = NanoScheme::new(a.mode.into());
            let stage = sch.nano_stage(a.depth)?;
            let paths: Vec<Vec<String>> = stage
                .labels
                .iter()
                .map(|l| Ok(NodeRef::from_index(l.clone())?.path().iter().map(|k| k.to_string()).collect()))
                .collect::<Result<_>>()?;
            let tsv = exponent_table(stage.labels.iter().map(|l| l.to_string()).zip(stage.set.intervals()));
            let json = json!({
                "scheme": "nano",
                "mode": sch.mode,
                "ambient": sch.ambient(),
                "stage": stage,
                "paths": paths,
            });
            Ok(Artifact::new(json, tsv))
        }
        SchemeKind::Pico => {
            let sch = PicoScheme::new(a.pico.params())?;
            let stage = sch.pico_stage(a.depth)?;
            let tsv = exponent_table(stage.labels.iter().map(|l| l.to_string()).zip(stage.set.intervals()));
            let json = json!({
                "scheme": "pico",
                "params": sch.params,
                "unassigned": sch.unassigned,
                "stage": stage,
            });
            Ok(Artifact::new(json, tsv))
        }
        SchemeKind::Rational => {
            let sch = GdeltaRationalScheme::new(family(&a.family)?, a.base)?;
            let st = rational_cover_stage(&sch, a.depth as u64, a.count)?;
            let tsv = exponent_table(st.iter().map(|r| (r.index.to_string(), &r.interval)));
            let json = json!({ "scheme": "rational", "family": sch.family, "base": a.base, "n": a.depth, "intervals": st });
            Ok(Artifact::new(json, tsv))
        }
        SchemeKind::Spacing => {
            let host = Interval::new(Numeral::zero(13)?, Numeral::from_int(13, 1)?)?;
            let blocks: BTreeSet<u64> = a.blocks.iter().copied().collect();
            let sch = spacing_place(a.m, &host, &blocks)?;
            let report = spacing_condition_check(&sch);
            let tsv = exponent_table(sch.placements.iter().map(|p| (p.index.to_string(), &p.interval)));
            let status = if report.passed { Status::Ok } else { Status::Invariant };
            let json = json!({ "scheme": "spacing", "placement": sch, "report": report });
            Ok(Artifact::new(json, tsv).with_status(status))
        }
    }
}

fn cover(a: &CoverArgs) -> Result<Artifact> {
    let p: CoverProblem = match &a.problem {
        Some(path) => read_json(path)?,
        None => {
            let target = NanoScheme::new(a.mode.into()).nano_stage(a.depth)?.set;
            let eps = parse_eps(&a.eps, 2)?;
            let budgets = BudgetList::from_family(&family(&a.family)?, &eps, a.count, a.banned.iter().copied().collect())?;
            CoverProblem::new(target, budgets)?
        }
    };
    let (solver, verdict) = match a.solver {
        Solver::Dp => ("dp", solve_feasible(&p)?),
        Solver::Greedy => ("greedy", greedy_cover(&p)),
    };
    let status = if verdict.feasible && validate_cover(&p, &verdict.placement).is_err() {
        Status::Invariant
    } else {
        Status::Ok
    };
    let mut tsv = String::from("index\texponent\tplaced\n");
    for (i, l) in p.budgets.lengths.iter().enumerate() {
        let placed = verdict.placement.get(i).is_some_and(|x| x.is_some());
        let _ = writeln!(tsv, "{i}\t{}\t{}", exponent(l), placed as u8);
    }
    let json = json!({ "problem": p, "solver": solver, "verdict": verdict });
    Ok(Artifact::new(json, tsv).with_status(status))
}

fn stage_from_json(v: &Value) -> Result<IntervalSet> {
    if let Some(set) = v.get("stage").and_then(|s| s.get("set")) {
        return Ok(serde_json::from_value(set.clone())?);
    }
    serde_json::from_value(v.clone()).context("input is neither a construct output nor an interval set")
}

fn sources(a: &TransformArgs) -> Result<Vec<StageSource>> {
    let mut out = Vec::new();
    if a.nano {
        out.push(StageSource::nano(&NanoScheme::new(a.mode.into()), a.depth)?);
    }
    for path in &a.input {
        let v: Value = read_json(path)?;
        let set = stage_from_json(&v).with_context(|| path.display().to_string())?;
        out.push(StageSource::new(path.display().to_string(), vec![set])?);
    }
    Ok(out)
}

fn bundle(target: &str, eps: &EpsilonSpec, cover: &LabeledCover, report: Value) -> Value {
    json!({ "targetRef": target, "eps": eps, "entries": cover.entries, "report": report })
}

fn transform(a: &TransformArgs) -> Result<Artifact> {
    let srcs = sources(a)?;
    let base = srcs.first().map(|s| s.base()).unwrap_or(2);
    let fam = match a.spread {
        Some(m) => microsets::shift_family(&family(&a.family)?, m)?,
        None => family(&a.family)?,
    };
    let points = a.points.iter().map(|&v| Ok(Numeral::from_int(base, v)?)).collect::<Result<Vec<_>>>()?;
    let first = || srcs.first().context("this operation needs --nano or --input");
    match a.op {
        Op::Shift => {
            let src = first()?;
            let eps = parse_eps(&a.eps, base)?;
            let r = compact_shift(src, &fam, a.k, &eps)?;
            let tsv = cover_table(&r.cover);
            Ok(Artifact::new(bundle(&src.name, &eps, &r.cover, serde_json::to_value(&r)?), tsv))
        }
        Op::Sigma => {
            let eps = parse_eps(&a.eps, base)?;
            let mut all = srcs.clone();
            for p in &points {
                all.push(StageSource::points(base, std::slice::from_ref(p))?);
            }
            let refs: Vec<&dyn CoverSource> = all.iter().map(|s| s as &dyn CoverSource).collect();
            let u = sigma_union_cover(&refs, &fam, &eps)?;
            let names: Vec<&str> = all.iter().map(|s| s.name.as_str()).collect();
            let tsv = cover_table(&u.cover);
            Ok(Artifact::new(bundle(&names.join(" ∪ "), &eps, &u.cover, serde_json::to_value(&u.blocks)?), tsv))
        }
        Op::Decompose => {
            let src = first()?;
            let r = decompose_m(src, &fam, a.m, a.levels)?;
            let mut bundles = Vec::new();
            let mut tsv = String::from("part\teps\tindex\texponent\n");
            for (j, covers) in r.part_covers.iter().enumerate() {
                for pc in covers {
                    bundles.push(bundle(&format!("{}/part{j}", src.name), &pc.eps, &pc.cover, json!({ "part": j })));
                    for e in &pc.cover.entries {
                        let _ = writeln!(tsv, "{j}\t{}\t{}\t{}", pc.eps.t, e.index, exponent(&e.interval.length()));
                    }
                }
            }
            Ok(Artifact::new(json!({ "result": r, "bundles": bundles }), tsv))
        }
        Op::Merge => {
            let eps = parse_eps(&a.eps, base)?;
            let input = match a.case {
                1 => MergeInput::Case1 { pieces: srcs.clone(), fam },
                2 => MergeInput::Case2 { rows: NestedRows::rational(a.rows, a.cols)? },
                c => bail!("merge case must be 1 or 2, got {c}"),
            };
            let plan = smz_merge(&input, &points, &eps)?;
            let tsv = cover_table(&plan.cover);
            Ok(Artifact::new(bundle("A ∪ B", &eps, &plan.cover, serde_json::to_value(&plan)?), tsv))
        }
        Op::Null => {
            let stored = a.table_rows + 3 * a.table_cols + 2;
            let inp = match a.seed {
                Some(s) => NullCoverInput::random(s, a.table_rows, a.table_cols),
                None => NullCoverInput::parametric(stored, a.table_cols),
            };
            let rep = null_to_family(&inp, a.table_rows, a.table_cols)?;
            let mut tsv = String::from("m\tn\texponent\n");
            for s in &rep.samples {
                let _ = writeln!(tsv, "{}\t{}\t{}", s.m, s.n, exponent(&s.value));
            }
            let status = if rep.checks.all() { Status::Ok } else { Status::Invariant };
            Ok(Artifact::new(json!({ "seed": a.seed, "report": rep }), tsv).with_status(status))
        }
    }
}

fn candidates(a: &WitnessArgs, make: impl FnOnce(u64) -> microsets::Result<Vec<Candidate>>) -> Result<Vec<Candidate>> {
    match (&a.placement, a.seed) {
        (Some(path), _) => {
            let placed: Vec<Option<Interval>> = read_json(path)?;
            Ok(vec![Candidate { seed: 0, source: path.display().to_string(), placed }])
        }
        (None, Some(seed)) => Ok(make(seed)?),
        (None, None) => bail!("--seed is required to generate candidate covers"),
    }
}

fn witness(a: &WitnessArgs) -> Result<Artifact> {
    let mut status = Status::Ok;
    let mut results = Vec::new();
    let mut tsv = String::from("seed\tsource\tresult\tverified\n");
    match a.scheme {
        WitnessScheme::Nano => {
            let sch = NanoScheme::new(a.mode.into());
            for c in candidates(a, |s| nano_candidates(&sch, s, a.candidates, a.budgets))? {
                let w = nano_witness_chain(&sch, &c.placed, a.depth)?;
                let verified = verify_chain(&w, &c.placed).is_ok();
                if !verified {
                    status = status.worst(Status::Invariant);
                }
                let _ = writeln!(tsv, "{}\t{}\tdefeated\t{}", c.seed, c.source, pass(verified));
                results.push(json!({ "candidate": c, "result": "defeated", "chain": w, "verified": verified }));
            }
        }
        WitnessScheme::Pico => {
            let sch = PicoScheme::new(a.pico.params())?;
            for c in candidates(a, |s| pico_candidates(&sch, a.banned, s, a.candidates, a.budgets))? {
                let w = pico_witness_chain(&sch, &c.placed, a.banned, a.depth)?;
                let defeated = w.outcome.is_defeated();
                let verified = defeated && verify_chain(w.outcome.chain(), &c.placed).is_ok();
                status = status.worst(match (defeated, verified) {
                    (false, _) => Status::Inconclusive,
                    (true, false) => Status::Invariant,
                    (true, true) => Status::Ok,
                });
                let result = if defeated { "defeated" } else { "inconclusive" };
                let _ = writeln!(tsv, "{}\t{}\t{result}\t{}", c.seed, c.source, pass(verified));
                results.push(json!({ "candidate": c, "result": result, "witness": w, "verified": verified }));
            }
        }
    }
    let scheme = match a.scheme {
        WitnessScheme::Nano => "nano",
        WitnessScheme::Pico => "pico",
    };
    let json = json!({ "scheme": scheme, "seed": a.seed, "depth": a.depth, "results": results });
    Ok(Artifact::new(json, tsv).with_status(status))
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn demo(a: &DemoArgs) -> Result<Artifact> {
    let params = match a.kind {
        WitnessScheme::Nano => {
            let d = NanoDemoParams::default();
            DemoParams::Nano(NanoDemoParams {
                stage: a.depth.unwrap_or(d.stage),
                eps: if a.eps.is_empty() { d.eps } else { a.eps.clone() },
                seed: a.seed,
                candidates: a.candidates.unwrap_or(d.candidates),
                budgets: a.budgets.unwrap_or(d.budgets),
                chain_depth: d.chain_depth,
            })
        }
        WitnessScheme::Pico => {
            let d = PicoDemoParams::default();
            DemoParams::Pico(PicoDemoParams {
                scheme: a.pico.params(),
                banned: if a.banned.is_empty() { d.banned } else { a.banned.clone() },
                seed: a.seed,
                candidates: a.candidates.unwrap_or(d.candidates),
                budgets: a.budgets.unwrap_or(d.budgets),
                chain_depth: a.depth.map_or(d.chain_depth, |x| x as usize),
            })
        }
    };
    let report = non_ideal_demo(&params)?;
    let mut tsv = String::from("seed\tsource\tbanned\tdefeated\tverified\tcontrol\n");
    for d in report.defeats() {
        let banned = d.banned.map_or("-".into(), |b| b.to_string());
        let control = d.control_ok.map_or("-", pass);
        let _ = writeln!(tsv, "{}\t{}\t{banned}\t{}\t{}\t{control}", d.seed, d.source, pass(d.defeated), pass(d.verified));
    }
    let certified = match &report {
        DemoReport::Nano { parts, .. } => parts.len(),
        DemoReport::Pico { levels, .. } => levels.len(),
    };
    let status = if report.all_defeated() { Status::Ok } else { Status::Invariant };
    let json = json!({
        "params": params,
        "report": report,
        "summary": { "certified_covers": certified, "candidates": report.defeats().len(), "all_defeated": report.all_defeated() },
    });
    Ok(Artifact::new(json, tsv).with_status(status))
}
