//! The eight acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p sigmatree-cli --test acceptance -- --nocapture` to
//! see the lines. Time limits are the pinned tolerances below.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigmatree_cli::report::{ClassificationView, Report, SigmaView};
use sigmatree_cli::run_captured;
use sigmatree_core::ball::{expand_pair, MappedBallPair, DEFAULT_BUDGET};
use sigmatree_core::classify::{classify_ends, end_faced, marked_classes, q_fiber_singleton, Classification};
use sigmatree_core::corpus;
use sigmatree_core::end::EndSpec;
use sigmatree_core::lifting::{lift_ray, LiftStart};
use sigmatree_core::local::applicability_check;
use sigmatree_core::multiplicity::Multiplicity;
use sigmatree_core::oracle::{
    brute_face_scan_with, busemann_limit, interior_face_scan_saturated, probes_connected, saturated_marks,
};
use sigmatree_core::ptp::{ClassId, Ptp, TypeId};
use sigmatree_core::random::{random_end, random_ptp, RandomParams};
use sigmatree_core::witness::{disconnection_witness, repeat_bound};

const LIMIT_EXAMPLE: Duration = Duration::from_secs(1);
const LIMIT_UNIQUE: Duration = Duration::from_secs(10);
const LIMIT_PROPERTIES: Duration = Duration::from_secs(60);
const LIMIT_GEOMETRY: Duration = Duration::from_secs(10);
const LIMIT_WITNESS: Duration = Duration::from_secs(30);

type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn report(args: &[&str]) -> Result<Report, String> {
    let mut argv = vec!["sigmatree"];
    argv.extend_from_slice(args);
    let (code, out, err) = run_captured(argv);
    if code != 0 {
        return Err(format!("{args:?} exited {code}: {err}"));
    }
    serde_json::from_str(&out).map_err(|e| format!("{args:?}: bad JSON: {e}"))
}

fn up_over(ptp: &Ptp, down: TypeId) -> TypeId {
    ptp.upstairs().type_ids().find(|&t| ptp.vertex_map(t) == down).expect("q is onto types")
}

fn criterion_1() -> Check {
    let r = report(&["expand", "two_rose", "--depth", "3", "--json"])?;
    let local = r.local_properties.as_ref().ok_or("no local properties")?;
    ensure(local.locally_surjective && !local.locally_injective, || format!("local properties {local:?}"))?;
    ensure(r.classification == Some(ClassificationView::AllFaced), || format!("{:?}", r.classification))?;
    ensure(r.sigma1 == Some(SigmaView::Empty), || format!("{:?}", r.sigma1))?;
    let ex = r.expand.as_ref().ok_or("no expand section")?;
    ensure(ex.up.interior_degrees == [7] && ex.down.interior_degrees == [4], || {
        format!("degrees {:?}/{:?}", ex.up.interior_degrees, ex.down.interior_degrees)
    })?;
    let (code, out, _) = run_captured(["sigmatree", "classify", "two_rose"]);
    ensure(code == 0 && out.contains("Σ¹ = ∅"), || format!("summary: {out}"))
}

fn criterion_2() -> Check {
    let r = report(&["expand", "free_product", "--depth", "2", "--omega-cap", "4", "--json"])?;
    ensure(r.sigma1 == Some(SigmaView::Empty), || format!("{:?}", r.sigma1))?;
    let ex = r.expand.as_ref().ok_or("no expand section")?;
    ensure(ex.up.stars.values().all(|&m| m == Multiplicity::Omega), || format!("up stars {:?}", ex.up.stars))?;
    ensure(ex.down.interior_degrees == [4], || format!("down degrees {:?}", ex.down.interior_degrees))
}

fn criterion_3() -> Check {
    let r = report(&["expand", "bs24_to_bs12", "--depth", "3", "--json"])?;
    let local = r.local_properties.as_ref().ok_or("no local properties")?;
    ensure(local.locally_surjective && !local.locally_injective, || format!("local properties {local:?}"))?;
    ensure(r.sigma1 == Some(SigmaView::Empty), || format!("{:?}", r.sigma1))?;
    let ex = r.expand.as_ref().ok_or("no expand section")?;
    ensure(ex.up.interior_degrees == [6] && ex.down.interior_degrees == [3], || {
        format!("degrees {:?}/{:?}", ex.up.interior_degrees, ex.down.interior_degrees)
    })?;
    let o = report(&["oracle", "bs24_to_bs12", "--depth", "4", "--omega-cap", "2", "--json"])?;
    let o = o.oracle.ok_or("no oracle section")?;
    ensure(o.agrees == Some(true) && o.interior_all_faced, || format!("oracle {o:?}"))
}

fn criterion_4() -> Check {
    let r = report(&["oracle", "ascending_synthetic", "--depth", "10", "--json"])?;
    match &r.classification {
        Some(ClassificationView::UniqueCandidate { end }) => ensure(end.cycle == ["u+"], || format!("cycle {:?}", end.cycle))?,
        other => return Err(format!("classification {other:?}")),
    }
    let o = r.oracle.ok_or("no oracle section")?;
    for s in o.scans.iter().filter(|s| (3..=8).contains(&s.depth)) {
        ensure(s.unfaced == 1, || format!("depth {}: {} unfaced cones", s.depth, s.unfaced))?;
    }
    ensure(o.scans.iter().filter(|s| (3..=8).contains(&s.depth)).count() == 6, || "missing scan depths".into())?;
    ensure(o.unfaced_on_spine == Some(true), || "unfaced cone off the spine".into())?;
    let rs: Vec<i64> = o.connectivity.iter().map(|c| c.r).collect();
    ensure(rs == [-2, -1, 0, 1, 2], || format!("connectivity radii {rs:?}"))?;
    ensure(o.connectivity.iter().all(|c| c.connected), || format!("connectivity {:?}", o.connectivity))
}

/// Lifts counted on the quotient: each step multiplies by the fibers of the
/// sources of the cell carrying that target.
fn quotient_lift_count(ptp: &Ptp, t: TypeId, classes: &[ClassId]) -> Option<u64> {
    let Some((&d, rest)) = classes.split_first() else { return Some(1) };
    let mut total = 0;
    for (_, c) in ptp.cells_at(t).filter(|(_, c)| c.target == d) {
        for s in &c.sources {
            total += s.fiber.finite()? as u64 * quotient_lift_count(ptp, ptp.upstairs().class(s.class).to, rest)?;
        }
    }
    Some(total)
}

fn full_cells(ptp: &Ptp) -> bool {
    let down = ptp.downstairs();
    ptp.cells().iter().all(|c| down.class(c.target).mult == Multiplicity::Finite(c.coverage))
}

fn properties_hold_on(ptp: &Ptp, rng: &mut ChaCha8Rng) -> Check {
    let name = ptp.name();
    let c = classify_ends(ptp).classification;
    let base = c.candidate().map_or(TypeId(0), |e| up_over(ptp, e.base_type));
    let radius = 6;
    let mut pair: MappedBallPair = expand_pair(ptp, base, radius, 2).map_err(|e| format!("{name}: {e}"))?;
    let marked = saturated_marks(&pair);
    let spine = match c.candidate() {
        Some(e) => Some(pair.realize_end(e, radius as usize).map_err(|e| e.to_string())?),
        None => None,
    };

    // (b) and (e): cone scans against the classifier.
    for r in 1..=radius {
        let unfaced: Vec<_> = brute_face_scan_with(&pair, r, &marked).unfaced().collect();
        ensure(unfaced.len() <= 1, || format!("{name}: {} unfaced cones at depth {r}", unfaced.len()))?;
        match (&c, &spine) {
            (Classification::AllFaced, _) => ensure(unfaced.is_empty(), || format!("{name}: AllFaced but cone unfaced at {r}"))?,
            (Classification::UniqueCandidate(_), Some(tau)) => {
                ensure(unfaced == [tau.vertices[r as usize]], || format!("{name}: depth {r} unfaced {unfaced:?} off spine"))?
            }
            _ => return Err(format!("{name}: classification {c:?}")),
        }
    }

    // (a): every vertex of depth at most 5 is faced.
    let interior = interior_face_scan_saturated(&mut pair, radius - 1, repeat_bound(ptp) as u32).map_err(|e| e.to_string())?;
    ensure(interior.all_faced(), || format!("{name}: unfaced vertices {:?}", interior.unfaced().collect::<Vec<_>>()))?;

    // (c): singleton fibers exactly over unfaced ends.
    let down = ptp.downstairs();
    let mut ends: Vec<EndSpec> = Vec::new();
    for i in 0..20 {
        let t = TypeId(i % down.vertex_types.len());
        ends.push(random_end(rng, down, t, 3, 3).ok_or("no random end")?);
    }
    for end in &ends {
        let singleton = q_fiber_singleton(ptp, end).map_err(|e| e.to_string())?;
        let faced = end_faced(ptp, end).map_err(|e| e.to_string())?.is_some();
        ensure(singleton != faced, || format!("{name}: end {} singleton {singleton} faced {faced}", end.display(down)))?;
    }

    // (d): lift counts are products of fibers.
    for t in ptp.upstairs().type_ids() {
        let mut pair = expand_pair(ptp, t, 5, 4).map_err(|e| e.to_string())?;
        let end = random_end(rng, down, ptp.vertex_map(t), 2, 3).ok_or("no random end")?;
        let ray = pair.realize_end(&end, 5).map_err(|e| e.to_string())?;
        let classes = ray.classes(pair.down());
        for d in 0..=5 {
            let tree = lift_ray(&pair, &ray, LiftStart::Vertex(pair.up().base()), d).map_err(|e| e.to_string())?;
            for k in 0..d {
                let sum: usize = tree.fibers[k].iter().map(|&f| f as usize).sum();
                ensure(tree.counts[k + 1] == sum, || format!("{name}: step {k} count {} vs fibers {sum}", tree.counts[k + 1]))?;
            }
            if full_cells(ptp) {
                if let Some(want) = quotient_lift_count(ptp, t, &classes[..d]) {
                    ensure(tree.lifts.len() as u64 == want, || format!("{name}: {} lifts, quotient says {want}", tree.lifts.len()))?;
                }
            }
        }
    }
    Ok(())
}

fn criterion_5() -> Check {
    let mut docs: Vec<Ptp> =
        corpus::entries().iter().map(|e| e.ptp()).filter(|p| applicability_check(p).main_theorem_applies).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let params = RandomParams::default();
    for i in 0..100 {
        let p = random_ptp(&mut rng, &params, &format!("fuzz_{i}"));
        let types = p.upstairs().vertex_types.len() + p.downstairs().vertex_types.len();
        ensure(types <= 4, || format!("{} has {types} vertex types", p.name()))?;
        ensure(!marked_classes(&p).has_partial(), || format!("{} is partially marked", p.name()))?;
        docs.push(p);
    }
    for ptp in &docs {
        properties_hold_on(ptp, &mut rng)?;
    }
    Ok(())
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for entry in corpus::entries() {
        let ptp = entry.ptp();
        let down = ptp.downstairs();
        for _ in 0..5 {
            let base = TypeId(rng.random_range(0..down.vertex_types.len()));
            let end = random_end(&mut rng, down, base, 2, 3).ok_or("no random end")?;
            let mut pair = MappedBallPair::lazy(&ptp, up_over(&ptp, base), 2, DEFAULT_BUDGET);
            pair.expand_down_to(8).map_err(|e| e.to_string())?;
            let tau = pair.realize_end(&end, 8).map_err(|e| e.to_string())?;
            let ball = pair.down();
            for p in ball.vertex_ids() {
                let beta = ball.busemann(&tau, p).map_err(|e| e.to_string())?;
                // Beyond the merge point the limit has stabilized.
                let m = (0..=tau.len()).rev().find(|&t| ball.is_ancestor_or_self(tau.vertices[t], p)).unwrap_or(0);
                for t in m..=tau.len() {
                    let lim = busemann_limit(ball, &tau, p, t);
                    ensure(lim == beta, || format!("{}: β = {beta}, limit at t={t} is {lim}", entry.name))?;
                }
            }
            let mut prev: Option<BTreeSet<_>> = None;
            for r in (-8..=8).rev() {
                let hb: BTreeSet<_> = ball.horoball_filter(&tau, r).map_err(|e| e.to_string())?.into_iter().collect();
                if let Some(inner) = &prev {
                    ensure(inner.is_subset(&hb), || format!("{}: horoball {} not inside {r}", entry.name, r + 1))?;
                }
                prev = Some(hb);
            }
        }
    }
    Ok(())
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in ["two_rose", "bs24_to_bs12"] {
        let ptp = corpus::load_example(name).map_err(|e| e.to_string())?.ptp();
        let down = ptp.downstairs();
        let mut ends = Vec::new();
        for _ in 0..1000 {
            if ends.len() == 10 {
                break;
            }
            let base = TypeId(rng.random_range(0..down.vertex_types.len()));
            let end = random_end(&mut rng, down, base, 3, 3).ok_or("no random end")?;
            if end_faced(&ptp, &end).map_err(|e| e.to_string())?.is_some() {
                ends.push(end);
            }
        }
        ensure(ends.len() == 10, || format!("{name}: only {} faced ends sampled", ends.len()))?;
        for end in &ends {
            for lag in [1u32, 2, 4] {
                let label = || format!("{name} {} lag {lag}", end.display(down));
                let res = disconnection_witness(&ptp, end, lag, 12, 4, DEFAULT_BUDGET).map_err(|e| format!("{}: {e}", label()))?;
                let w = &res.witness;
                ensure(w.verified, || format!("{}: not verified", label()))?;
                let joined = probes_connected(&res.pair, &res.tau, -(lag as i64), w.probes[0], w.probes[1]).map_err(|e| e.to_string())?;
                ensure(!joined, || format!("{}: probes joined", label()))?;
            }
        }
    }
    Ok(())
}

fn criterion_8() -> Check {
    let bin = env!("CARGO_BIN_EXE_sigmatree");
    for name in corpus::names() {
        for args in [
            vec!["analyze", name, "--json"],
            vec!["classify", name],
            vec!["oracle", name, "--depth", "4", "--json"],
            vec!["expand", name, "--depth", "2", "--json"],
        ] {
            let run = || Command::new(bin).args(&args).output().map_err(|e| e.to_string());
            let (a, b) = (run()?, run()?);
            ensure(!a.stdout.is_empty(), || format!("{args:?}: empty output"))?;
            ensure(a.stdout == b.stdout && a.status == b.status, || format!("{args:?}: outputs differ"))?;
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [(&str, Option<Duration>, fn() -> Check); 8] = [
        ("two_rose reproduction", Some(LIMIT_EXAMPLE), criterion_1),
        ("free_product reproduction", Some(LIMIT_EXAMPLE), criterion_2),
        ("bs24_to_bs12 reproduction", Some(LIMIT_EXAMPLE), criterion_3),
        ("unique candidate path", Some(LIMIT_UNIQUE), criterion_4),
        ("property suite", Some(LIMIT_PROPERTIES), criterion_5),
        ("geometry suite", Some(LIMIT_GEOMETRY), criterion_6),
        ("witness suite", Some(LIMIT_WITNESS), criterion_7),
        ("determinism", None, criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (label, limit, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = outcome.and_then(|()| match limit {
            Some(l) if took > l => Err(format!("took {took:.2?}, limit {l:?}")),
            _ => Ok(()),
        });
        match &outcome {
            Ok(()) => println!("criterion {}: PASS  {label} ({took:.2?})", i + 1),
            Err(e) => {
                println!("criterion {}: FAIL  {label} ({took:.2?}): {e}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
