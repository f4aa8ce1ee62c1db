//! The acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{brute_force_feasible, random_instance, rational_value};
use microsets::construct::nano::{length_exponent, s_set, t_range};
use microsets::construct::{gap_inequality, spacing_place, NanoScheme, NodeRef, PicoParams};
use microsets::procedures::{
    compact_shift, decompose_m, null_to_family, sigma_union_cover, smz_merge, CoverSource, MergeInput, NestedRows,
    NullCoverInput, StageSource,
};
use microsets::witness::nano::shrunk_quarter_budgets;
use microsets::witness::{
    nano_candidates, nano_witness_chain, non_ideal_demo, spacing_condition_check, verify_chain, DemoParams,
    PicoDemoParams,
};
use microsets::{
    counting_certificate, greedy_cover, shift_family, solve_feasible, validate_cover, validate_labeled, BudgetList,
    Certificate, CoverProblem, EpsilonSpec, Interval, IntervalSet, Numeral, PowerFamily, Run,
};
use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(label: &str, t: Duration, limit: Duration) -> Result<(), String> {
    ensure(t < limit, || format!("{label} took {t:?}, limit {limit:?}"))
}

fn unit13() -> Interval {
    Interval::new(Numeral::zero(13).unwrap(), Numeral::from_int(13, 1).unwrap()).unwrap()
}

fn pow(base: u32, e: impl Into<BigInt>) -> Numeral {
    Numeral::from_power(base, e).unwrap()
}

fn spacing_reproduction() -> Outcome {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for m in 0..=1u64 {
        for b in [1u64, 2] {
            let start = Instant::now();
            let sch = spacing_place(m, &unit13(), &BTreeSet::from([b])).map_err(|e| e.to_string())?;
            let r = spacing_condition_check(&sch);
            within(&format!("m={m} B={{{b}}}"), start.elapsed(), Duration::from_secs(10))?;
            ensure(r.lengths_ok, || format!("m={m} B={{{b}}}: lengths {:?}", r.length_failures))?;
            ensure(r.distances_ok, || format!("m={m} B={{{b}}}: distances {:?}", r.distance_failures))?;
            for t in &r.thirds {
                let line = format!("m={m} b={b}: {} of {}", t.total, t.block_size);
                // strictly below a third; for b = 1 that is at most 3 of 12
                if t.strict && (b != 1 || t.total <= 3) {
                    notes.push(line);
                } else {
                    failures.push(line);
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(notes.join(", "))
    } else {
        Err(format!("one-third bound not strict: {}", failures.join(", ")))
    }
}

fn nano_reproduction() -> Outcome {
    let sch = NanoScheme::default();
    let start = Instant::now();
    let stage = sch.nano_stage(2).map_err(|e| e.to_string())?;
    within("stage 2", start.elapsed(), Duration::from_secs(10))?;
    ensure(stage.set.len() == 504, || format!("stage 2 has {} intervals", stage.set.len()))?;

    // smallest length 2^(−2^256), at indices 510 and 511
    let smallest = stage.set.intervals().iter().map(|c| c.length()).min_by(|a, b| a.partial_cmp(b).unwrap()).unwrap();
    ensure(smallest == pow(2, BigInt::one() << 256u32), || "smallest exponent is not 2^256".into())?;

    // S_0 = {0,1}, S_(i+1) = ⋃_(j∈S_i) T_j, T_j = [2^(j+1), 2^(j+2))
    let big = |v: std::ops::Range<u32>| v.map(BigInt::from).collect::<Vec<_>>();
    let s: Vec<Vec<BigInt>> = (0..=2).map(|i| s_set(i).unwrap()).collect();
    ensure(s[0] == big(0..2) && s[1] == big(2..8) && s[2] == big(8..512), || "S_i mismatch".into())?;
    for i in 0..2 {
        let mut union = Vec::new();
        for j in &s[i] {
            let (lo, hi) = t_range(j.try_into().unwrap()).unwrap();
            ensure(lo == BigInt::one() << (u64::try_from(j).unwrap() + 1), || format!("T_{j} start"))?;
            let mut k = lo;
            while k < hi {
                union.push(k.clone());
                k += 1;
            }
        }
        ensure(union == s[i + 1], || format!("⋃ T_j over S_{i} ≠ S_{}", i + 1))?;
    }
    ensure(stage.labels == s[2], || "stage 2 labels are not S_2".into())?;

    // |I_2k| = |I_2k+1| = 2^(−2^(k+1))
    for (label, c) in stage.labels.iter().zip(stage.set.intervals()) {
        let k: BigInt = label >> 1u32;
        let want = BigInt::one() << u64::try_from(&k + 1).unwrap();
        ensure(c.length() == pow(2, want.clone()), || format!("|I_{label}|"))?;
        ensure(length_exponent(label).to_big() == Some(want), || format!("length table at {label}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut nodes = 0;
    for _ in 0..100 {
        let r = NodeRef::random(&mut rng, 3).map_err(|e| e.to_string())?;
        ensure(r.path().len() == 4, || format!("chain of {} nodes", r.path().len()))?;
        sch.node(&r).map_err(|e| e.to_string())?;
        for j in r.path() {
            let g = gap_inequality(j).map_err(|e| e.to_string())?;
            ensure(g.holds && g.strict, || format!("gap inequality fails at node {j}"))?;
            nodes += 1;
        }
    }
    Ok(format!("504 intervals in {:?}, smallest 2^(−2^256), {nodes} chain nodes checked", start.elapsed()))
}

fn witness_completeness() -> Outcome {
    let sch = NanoScheme::default();
    let cands = nano_candidates(&sch, 0, 200, 16).map_err(|e| e.to_string())?;
    ensure(cands.len() == 200, || "candidate count".into())?;
    let budgets = shrunk_quarter_budgets(16).map_err(|e| e.to_string())?;
    let mut inconclusive = 0;
    let mut sources = BTreeSet::new();
    for c in &cands {
        sources.insert(c.source.split_whitespace().next().unwrap_or("").to_string());
        for (k, j) in c.placed.iter().enumerate() {
            if let Some(j) = j {
                ensure(j.length() <= budgets.lengths[k], || format!("seed {}: J_{k} over budget", c.seed))?;
            }
        }
        match nano_witness_chain(&sch, &c.placed, 3) {
            Ok(w) if w.depth() == 3 && verify_chain(&w, &c.placed).is_ok() => {}
            _ => inconclusive += 1,
        }
    }
    ensure(inconclusive == 0, || format!("{inconclusive} of 200 trials without a verified chain"))?;
    ensure(sources.contains("greedy") && sources.contains("solver"), || format!("sources {sources:?}"))?;
    Ok(format!("200 trials, 0 inconclusive, sources {sources:?}"))
}

fn pico_demo() -> Outcome {
    let params = PicoDemoParams { scheme: PicoParams { steps: 2, ..Default::default() }, ..Default::default() };
    ensure(params.banned == vec![0, 1, 2, 3, 4] && params.candidates == 50, || "demo parameters".into())?;
    let r = non_ideal_demo(&DemoParams::Pico(params)).map_err(|e| e.to_string())?;
    let d = r.defeats();
    ensure(d.len() == 250, || format!("{} candidates", d.len()))?;
    let lost: Vec<_> = d.iter().filter(|x| !(x.defeated && x.verified)).map(|x| (x.banned, x.seed)).collect();
    ensure(lost.is_empty(), || format!("not defeated: {lost:?}"))?;
    let control: Vec<_> = d.iter().filter(|x| x.control_ok != Some(true)).map(|x| (x.banned, x.seed)).collect();
    ensure(control.is_empty(), || format!("control failed: {control:?}"))?;
    Ok("N = 0..4, 50 candidates each, all defeated and verified, controls pass".into())
}

fn instances() -> Vec<CoverProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..1000).map(|_| random_instance(&mut rng, 6, 8)).collect()
}

fn solver_exactness() -> Outcome {
    for (i, p) in instances().iter().enumerate() {
        let v = solve_feasible(p).map_err(|e| e.to_string())?;
        ensure(v.feasible == brute_force_feasible(p), || format!("instance {i} disagrees with the oracle"))?;
        if v.feasible {
            validate_cover(p, &v.placement).map_err(|e| format!("instance {i}: {e}"))?;
        }
    }
    let n = |v: i64| Numeral::from_int(2, v).unwrap();
    let target = IntervalSet::normalize_union(
        2,
        vec![Interval::new(n(0), pow(2, 4)).unwrap(), Interval::new(n(5), n(7)).unwrap()],
    )
    .unwrap();
    let p = CoverProblem::new(target, BudgetList::new(vec![n(2), pow(2, 1)], BTreeSet::new()).unwrap()).unwrap();
    let dp = solve_feasible(&p).map_err(|e| e.to_string())?;
    ensure(dp.feasible && !greedy_cover(&p).feasible, || "greedy-fails/DP-succeeds instance".into())?;
    validate_cover(&p, &dp.placement).map_err(|e| e.to_string())?;
    Ok("1000 instances agree with brute force; greedy fails, DP succeeds on {[0,1/16],[5,7]}".into())
}

fn certificate_soundness() -> Outcome {
    let mut probs = instances();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    probs.extend((0..500).map(|_| random_instance(&mut rng, 6, 8)));
    let sch = NanoScheme::default();
    for d in 0..=2 {
        let set = sch.nano_stage(d).unwrap().set;
        for count in [2, 4, 8] {
            for t in [1, 2] {
                let eps = EpsilonSpec::new(2, t).unwrap();
                let b = BudgetList::from_family(&PowerFamily::nano(), &eps, count, BTreeSet::new()).unwrap();
                probs.push(CoverProblem::new(set.clone(), b).unwrap());
            }
        }
    }
    let (mut counted, mut measured) = (0, 0);
    for (i, p) in probs.iter().enumerate() {
        let v = solve_feasible(p).map_err(|e| e.to_string())?;
        let sum = p.budgets.usable().fold(Numeral::zero(p.target.base()).unwrap(), |a, k| &a + &p.budgets.lengths[k]);
        if sum < p.target.measure() {
            measured += 1;
            ensure(!v.feasible, || format!("instance {i}: measure bound contradicts a feasible verdict"))?;
        }
        if counting_certificate(p).is_some() {
            counted += 1;
            ensure(!v.feasible, || format!("instance {i}: counting certificate contradicts a feasible verdict"))?;
        }
        match &v.certificate {
            Some(Certificate::Measure { budget_sum, target_measure }) => {
                ensure(!v.feasible && budget_sum < target_measure, || format!("instance {i}: bad measure certificate"))?
            }
            Some(_) => ensure(!v.feasible, || format!("instance {i}: certificate on a feasible verdict"))?,
            None => {}
        }
    }
    Ok(format!("{} instances, {counted} counting and {measured} measure refutations, none contradicted", probs.len()))
}

fn procedure_validity() -> Outcome {
    let e = |r: microsets::Error| r.to_string();
    let half = EpsilonSpec::new(2, 1).unwrap();
    let quarter = EpsilonSpec::new(2, 2).unwrap();
    let nano = PowerFamily::nano();
    let two_nano = shift_family(&nano, 2).unwrap();
    let x = StageSource::nano(&NanoScheme::default(), 2).map_err(e)?;
    let mut checked = 0;
    let mut check = |target: &IntervalSet, fam: &PowerFamily, eps: &EpsilonSpec, c: &microsets::LabeledCover| {
        checked += 1;
        validate_labeled(target, fam, eps, c).map_err(|err| err.to_string())
    };

    let pts = |vs: &[i64]| StageSource::points(2, &vs.iter().map(|&v| Numeral::from_int(2, v).unwrap()).collect::<Vec<_>>()).unwrap();
    // an uncertified pigeonhole step emits no cover; anything emitted must validate
    let mut uncertified = 0;
    for fam in [PowerFamily::micro(), nano.clone(), PowerFamily::pico(), two_nano.clone()] {
        for set in [&[0][..], &[0, 3], &[0, 3, -7]] {
            for k in 0..4 {
                for eps in [&half, &quarter] {
                    let s = pts(set);
                    match compact_shift(&s, &fam, k, eps) {
                        Ok(r) => {
                            ensure(r.cover.indices().iter().all(|&i| i > k), || "shift used a low index".into())?;
                            check(&s.target().unwrap(), &fam, eps, &r.cover)?;
                        }
                        Err(microsets::Error::Uncertified(_)) => uncertified += 1,
                        Err(err) => return Err(err.to_string()),
                    }
                }
            }
        }
    }
    for k in 0..=1 {
        let r = compact_shift(&x, &two_nano, k, &half).map_err(e)?;
        check(&x.target().unwrap(), &two_nano, &half, &r.cover)?;
    }

    let (a, b, c) = (pts(&[0]), pts(&[5]), pts(&[6, 9]));
    for (srcs, fam) in [(vec![&a, &b, &c], &nano), (vec![&x, &a, &b], &two_nano)] {
        let dyns: Vec<&dyn CoverSource> = srcs.iter().map(|s| *s as &dyn CoverSource).collect();
        let u = sigma_union_cover(&dyns, fam, &half).map_err(e)?;
        let mut target = IntervalSet::empty(2);
        for s in &srcs {
            target = target.union(&s.target().unwrap()).unwrap();
        }
        check(&target, fam, &half, &u.cover)?;
    }

    let bpts: Vec<Numeral> = [-5, 3, 9].iter().map(|&v| Numeral::from_int(2, v).unwrap()).collect();
    let plan = smz_merge(&MergeInput::Case1 { pieces: vec![x.clone()], fam: two_nano.clone() }, &bpts, &half).map_err(e)?;
    check(&plan.target, &two_nano, &half, &plan.cover)?;
    for p in &bpts {
        ensure(plan.target.contains_point(p), || "merged target lost a point".into())?;
    }
    let rows = NestedRows::rational(3, 8).map_err(e)?;
    for pts in [&bpts[..0], &bpts[..1]] {
        let plan = smz_merge(&MergeInput::Case2 { rows: rows.clone() }, pts, &half).map_err(e)?;
        check(&plan.target, &nano, &half, &plan.cover)?;
    }

    let stage1 = StageSource::nano(&NanoScheme::default(), 1).map_err(e)?;
    let d = decompose_m(&stage1, &nano, 2, 1).map_err(e)?;
    ensure(d.parts.len() == 2, || "two parts".into())?;
    let mut joined = IntervalSet::empty(2);
    for (j, part) in d.parts.iter().enumerate() {
        joined = joined.union(part).unwrap();
        let eps: Vec<EpsilonSpec> = d.part_covers[j].iter().map(|pc| pc.eps.clone()).collect();
        ensure(eps == vec![half.clone(), quarter.clone()], || format!("part {j} eps {eps:?}"))?;
        for pc in &d.part_covers[j] {
            check(part, &nano, &pc.eps, &pc.cover)?;
        }
    }
    ensure(joined.covers(&stage1.target().unwrap()), || "parts miss the stage".into())?;
    let shifted = shift_family(&nano, 2).unwrap();
    for (n, block) in d.blocks.iter().enumerate() {
        check(&stage1.target().unwrap(), &shifted, &EpsilonSpec::new(2, n as u64 + 1).unwrap(), block)?;
    }
    Ok(format!("{checked} emitted covers validated ({uncertified} shifts uncertified); nano stage 1 splits into two parts covered at ε = 1/2, 1/4"))
}

fn null_tables() -> Outcome {
    let inp = NullCoverInput::parametric(20, 6);
    let rep = null_to_family(&inp, 6, 6).map_err(|e| e.to_string())?;
    for m in 0..6 {
        for n in 0..6 {
            ensure(rep.table[m][n] == pow(2, (m + 3 + n) as i64), || format!("a_({m},{n})"))?;
        }
    }
    ensure(rep.checks.all(), || format!("parametric checks {:?}", rep.checks))?;
    for seed in 0..50 {
        let rep = null_to_family(&NullCoverInput::random(seed, 5, 5), 5, 5).map_err(|e| e.to_string())?;
        ensure(rep.checks.all(), || format!("seed {seed}: {:?}", rep.checks))?;
    }
    Ok("parametric table exact; 50 random inputs satisfy every property".into())
}

fn random_numeral(rng: &mut ChaCha8Rng) -> Numeral {
    let base = [2u32, 3, 10, 13][rng.gen_range(0..4)];
    let mut runs = Vec::new();
    let mut next = rng.gen_range(-6i64..4);
    for _ in 0..rng.gen_range(0..4) {
        let lo = next + rng.gen_range(0..4);
        let hi = lo + rng.gen_range(0..5);
        runs.push(Run::new(lo, hi, rng.gen_range(1..base)));
        next = hi + 1;
    }
    let sign = if runs.is_empty() { 0 } else if rng.gen_bool(0.5) { 1 } else { -1 };
    Numeral::from_runs(base, sign, runs).unwrap()
}

fn numeral_kernel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..10_000 {
        let a = random_numeral(&mut rng);
        let b = {
            let b = random_numeral(&mut rng);
            Numeral::from_runs(a.base(), b.sign(), b.runs().iter().map(|r| Run::new(r.lo.clone(), r.hi.clone(), r.digit.min(a.base() - 1))).collect()).unwrap()
        };
        let (qa, qb) = (rational_value(&a), rational_value(&b));
        ensure(rational_value(&(&a + &b)) == &qa + &qb, || format!("case {i}: {a} + {b}"))?;
        ensure(rational_value(&(&a - &b)) == &qa - &qb, || format!("case {i}: {a} − {b}"))?;
        ensure(a.partial_cmp(&b) == qa.partial_cmp(&qb), || format!("case {i}: compare {a}, {b}"))?;
    }
    // 1 − base^(−E) with E of a thousand decimal digits: one long borrow run
    let e: BigInt = format!("1{}", "7".repeat(999)).parse().unwrap();
    let start = Instant::now();
    let mut shapes = Vec::new();
    for base in [2u32, 10] {
        let one = pow(base, 0);
        let d = &one - &pow(base, e.clone());
        shapes.push(d.runs().to_vec());
        let back = &d + &pow(base, e.clone());
        ensure(back == one, || format!("base {base}: borrow does not round-trip"))?;
    }
    let t = start.elapsed();
    within("borrow benchmark", t, Duration::from_millis(100))?;
    ensure(shapes[0] == vec![Run::new(1, e.clone(), 1)], || format!("base 2 borrow runs {:?}", shapes[0]))?;
    ensure(shapes[1] == vec![Run::new(1, e.clone(), 9)], || "base 10 borrow runs".into())?;
    Ok(format!("10^4 oracle cases; borrow across a 1000-digit exponent in {t:?}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "spacing algorithm", spacing_reproduction),
        (2, "nano counterexample", nano_reproduction),
        (3, "witness completeness", witness_completeness),
        (4, "pico point addition", pico_demo),
        (5, "solver exactness", solver_exactness),
        (6, "certificate soundness", certificate_soundness),
        (7, "procedure validity", procedure_validity),
        (8, "a_(m,n) tables", null_tables),
        (9, "numeral kernel", numeral_kernel),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let t = start.elapsed();
        match res {
            Ok(detail) => println!("criterion {n} ({name}): PASS [{t:.2?}] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL [{t:.2?}] {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
