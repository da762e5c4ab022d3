//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use horizon::bench::{self, BenchConfig};
use horizon::engine::Session;
use horizon::kb::KnowledgeBase;
use horizon_core::{
    auto_discount, fuse_dempster, fuse_dependent, fuse_smets, influence, make_boe, translate, zadeh_guard_demo,
    AutoDiscountConfig, CompatibilityRelation, Confidence, Error, Frame, FrameGallery, FusionRule, MassFunction,
    PropSet, SourceMeta, DEFAULT_EXPLANATION_CAP,
};
use horizon_oracle as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn to_mass(n: usize, bpa: &oracle::Bpa) -> MassFunction {
    MassFunction::from_assignments(n, bpa.iter().map(|&(s, m)| (PropSet::from_mask(s), m))).unwrap()
}

fn to_map(m: &MassFunction) -> BTreeMap<u64, f64> {
    m.focal_sets().map(|(s, v)| (s.to_mask().unwrap(), v)).collect()
}

fn inputs(rng: &mut ChaCha8Rng, max_n: usize, max_focal: usize, count: std::ops::RangeInclusive<usize>) -> (usize, Vec<oracle::Bpa>) {
    let n = rng.random_range(1..=max_n);
    let k = rng.random_range(count);
    let bpas = (0..k)
        .map(|_| {
            let with_theta = rng.random_bool(0.5);
            oracle::random_bpa(rng, n, max_focal, with_theta)
        })
        .collect();
    (n, bpas)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f0f);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut total_conflicts = 0;
    for case in 0..1000 {
        let (n, bpas) = inputs(&mut rng, 6, 4, 2..=4);
        let masses: Vec<MassFunction> = bpas.iter().map(|b| to_mass(n, b)).collect();
        let refs: Vec<&MassFunction> = masses.iter().collect();
        let smets = fuse_smets(&refs).map_err(|e| format!("case {case}: {e}"))?;
        let d = oracle::max_abs_diff(&to_map(&smets), &oracle::conjunctive(&bpas, n));
        ensure!(d <= 1e-9, "case {case}: smets differs by {d:e}");
        worst = worst.max(d);
        match (fuse_dempster(&refs), oracle::dempster(&bpas, n)) {
            (Ok(f), Some((expected, k))) => {
                let d = oracle::max_abs_diff(&to_map(&f.masses), &expected).max((f.conflict - k).abs());
                ensure!(d <= 1e-9, "case {case}: dempster differs by {d:e}");
                worst = worst.max(d);
            }
            (Err(Error::TotalConflict), None) => total_conflicts += 1,
            (got, want) => return Err(format!("case {case}: engine {got:?}, oracle {want:?}")),
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("1000 cases, max error {worst:.1e}, {total_conflicts} total conflicts agreed, {elapsed:.2?}"))
}

fn algebraic_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa19e);
    let mut dempster_assoc = 0;
    for case in 0..500 {
        let (n, bpas) = inputs(&mut rng, 6, 4, 3..=3);
        let m: Vec<MassFunction> = bpas.iter().map(|b| to_mass(n, b)).collect();
        let diff = |a: &MassFunction, b: &MassFunction| oracle::max_abs_diff(&to_map(a), &to_map(b));

        let ab = fuse_smets(&[&m[0], &m[1]]).unwrap();
        let ba = fuse_smets(&[&m[1], &m[0]]).unwrap();
        ensure!(diff(&ab, &ba) <= 1e-9, "case {case}: smets not commutative");
        let left = fuse_smets(&[&ab, &m[2]]).unwrap();
        let right = fuse_smets(&[&m[0], &fuse_smets(&[&m[1], &m[2]]).unwrap()]).unwrap();
        ensure!(diff(&left, &right) <= 1e-9, "case {case}: smets not associative");

        match (fuse_dempster(&[&m[0], &m[1]]), fuse_dempster(&[&m[1], &m[0]])) {
            (Ok(x), Ok(y)) => ensure!(diff(&x.masses, &y.masses) <= 1e-9, "case {case}: dempster not commutative"),
            (Err(_), Err(_)) => {}
            _ => return Err(format!("case {case}: dempster fails in one order only")),
        }
        let l = fuse_dempster(&[&m[0], &m[1]]).and_then(|x| fuse_dempster(&[&x.masses, &m[2]]));
        let r = fuse_dempster(&[&m[1], &m[2]]).and_then(|x| fuse_dempster(&[&m[0], &x.masses]));
        let all = fuse_dempster(&[&m[0], &m[1], &m[2]]);
        if let (Ok(l), Ok(r), Ok(all)) = (&l, &r, &all) {
            ensure!(diff(&l.masses, &r.masses) <= 1e-9, "case {case}: dempster not associative");
            ensure!(diff(&l.masses, &all.masses) <= 1e-9, "case {case}: pairwise and joint dempster differ");
            dempster_assoc += 1;
        } else {
            // the three-way combination is totally conflicting exactly when
            // some grouping of it is
            ensure!(all.is_err(), "case {case}: grouping changed total conflict");
        }

        let v = MassFunction::vacuous(n);
        ensure!(diff(&fuse_smets(&[&m[0], &v]).unwrap(), &m[0]) <= 1e-12, "case {case}: vacuous not a smets identity");
        ensure!(
            diff(&fuse_dempster(&[&v, &m[0]]).unwrap().masses, &m[0]) <= 1e-12,
            "case {case}: vacuous not a dempster identity"
        );

        let smets = fuse_smets(&[&m[0], &m[1], &m[2]]).unwrap();
        match (&all, smets.conditioned()) {
            (Ok(d), Some(c)) => {
                ensure!(diff(&d.masses, &c) <= 1e-9, "case {case}: dempster is not conditioned smets");
                ensure!((d.conflict - smets.unknown_mass()).abs() <= 1e-9, "case {case}: K is not the empty-set mass");
            }
            (Err(Error::TotalConflict), None) => {}
            (d, c) => return Err(format!("case {case}: normalization link broken: {d:?} vs {c:?}")),
        }
    }
    Ok(format!("500 instances, dempster associativity checked on {dempster_assoc}"))
}

fn commonality_multiplicativity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0ff);
    let mut checked = 0usize;
    for case in 0..200 {
        let (n, bpas) = inputs(&mut rng, 10, 6, 2..=3);
        let m: Vec<MassFunction> = bpas.iter().map(|b| to_mass(n, b)).collect();
        let refs: Vec<&MassFunction> = m.iter().collect();
        let fused = fuse_smets(&refs).unwrap();
        for mask in 0..=oracle::full(n) {
            let q = fused.commonality(&PropSet::from_mask(mask)).unwrap();
            let product: f64 = bpas.iter().map(|b| oracle::commonality(b, mask)).product();
            ensure!((q - product).abs() <= 1e-9, "case {case}, subset {mask:#b}: {q} vs {product}");
            checked += 1;
        }
    }
    Ok(format!("200 fusions, {checked} subsets, frames up to 10"))
}

fn discount_rates() -> Outcome {
    let cfg = AutoDiscountConfig::default();
    let rates = [Confidence::Certain, Confidence::Probable, Confidence::Possible].map(|c| cfg.rate_for(c));
    ensure!(rates == [0.0, 0.2, 0.4], "default rates {rates:?}");
    let a = PropSet::singleton(0);
    let theta = PropSet::full(3);
    let m = MassFunction::from_assignments(3, [(a.clone(), 1.0)]).unwrap();
    let p = auto_discount(&m, Confidence::Probable, &cfg).unwrap();
    ensure!(p.len() == 2 && p.mass(&a) == 0.8 && p.mass(&theta) == 0.2, "probable gave {p:?}");
    ensure!(auto_discount(&m, Confidence::Certain, &cfg).unwrap() == m, "certain changed the masses");
    let q = auto_discount(&m, Confidence::Possible, &cfg).unwrap();
    ensure!(q.mass(&a) == 0.6 && q.mass(&theta) == 0.4, "possible gave {q:?}");

    // the engine applies the same rates at fusion time
    let mut s = Session::new(common::sample_kb());
    ensure!(*s.auto_discount() == cfg, "session defaults {:?}", s.auto_discount());
    let probable = s
        .submit_boe("type", &[(&["SSK"][..], 1.0)], &common::source("p", Confidence::Probable))
        .unwrap();
    let vacuous = s
        .submit_boe::<&str>("type", &[], &common::source("v", Confidence::Certain))
        .unwrap();
    let fused = s.run_fusion(&[probable, vacuous], FusionRule::Dempster, "type", None).unwrap();
    let node = s.node(fused).unwrap();
    let frame = s.kb().gallery.frame("type").unwrap();
    let ssk = frame.set_of(&["SSK"]).unwrap();
    ensure!(
        node.boe.masses.mass(&ssk) == 0.8 && node.boe.masses.mass(&frame.theta()) == 0.2,
        "engine fusion gave {:?}",
        node.boe.masses
    );
    Ok("0/0.2/0.4; probable {A:1} -> {A:0.8, Θ:0.2} exactly".into())
}

fn zadeh() -> Outcome {
    let (a, b, c) = (1u64, 2u64, 4u64);
    let m1: oracle::Bpa = vec![(a, 0.99), (b, 0.01)];
    let m2: oracle::Bpa = vec![(c, 0.99), (b, 0.01)];
    let (x, y) = (to_mass(3, &m1), to_mass(3, &m2));
    let cmp = zadeh_guard_demo(&[(&x, Confidence::Probable), (&y, Confidence::Probable)], &AutoDiscountConfig::default())
        .map_err(|e| e.to_string())?;
    let plain_b = cmp.plain.masses.mass(&PropSet::from_mask(b));
    ensure!((plain_b - 1.0).abs() <= 1e-9, "plain B = {plain_b}");
    ensure!((cmp.plain.conflict - 0.9999).abs() <= 1e-9, "plain K = {}", cmp.plain.conflict);

    // independent discounting and combination
    let soften = |m: &oracle::Bpa| -> oracle::Bpa {
        let mut out: Vec<(u64, f64)> = m.iter().map(|&(s, v)| (s, 0.8 * v)).collect();
        out.push((oracle::full(3), 0.2));
        out
    };
    let (expected, k) = oracle::dempster(&[soften(&m1), soften(&m2)], 3).ok_or("oracle found total conflict")?;
    let got = &cmp.discounted.masses;
    let d = oracle::max_abs_diff(&to_map(got), &expected).max((cmp.discounted.conflict - k).abs());
    ensure!(d <= 1e-9, "discounted result differs from the oracle by {d:e}");
    let bel = |s: u64| got.belief(&PropSet::from_mask(s)).unwrap();
    ensure!(bel(a) > 0.43 && bel(c) > 0.43 && bel(b) < 0.01, "A {} C {} B {}", bel(a), bel(c), bel(b));
    let expected: oracle::Bpa = expected.into_iter().collect();
    let (oa, oc, ob) = (oracle::belief(&expected, a), oracle::belief(&expected, c), oracle::belief(&expected, b));
    ensure!(oa > 0.43 && oc > 0.43 && ob < 0.01, "oracle A {oa} C {oc} B {ob}");

    // same through the engine on the sample knowledge base
    let mut s = Session::new(common::sample_kb());
    let p = |name| common::source(name, Confidence::Probable);
    let n1 = s.submit_boe("classification", &[(&["Oberon"][..], 0.99), (&["Collins"][..], 0.01)], &p("x")).unwrap();
    let n2 = s.submit_boe("classification", &[(&["Kilo"][..], 0.99), (&["Collins"][..], 0.01)], &p("y")).unwrap();
    let off = s.run_fusion(&[n1, n2], FusionRule::Dempster, "classification", Some(false)).unwrap();
    let on = s.run_fusion(&[n1, n2], FusionRule::Dempster, "classification", Some(true)).unwrap();
    let support = |id, label: &str| {
        let set = s.kb().gallery.frame("classification").unwrap().set_of(&[label]).unwrap();
        let c = s.conclusion_of(id).unwrap();
        c.report.rows.iter().find(|r| r.statement == set).map_or(0.0, |r| r.support)
    };
    ensure!((support(off, "Collins") - 1.0).abs() <= 1e-9, "engine without discount: Collins {}", support(off, "Collins"));
    ensure!(
        support(on, "Oberon") > 0.43 && support(on, "Kilo") > 0.43 && support(on, "Collins") < 0.01,
        "engine with discount: {} {} {}",
        support(on, "Oberon"),
        support(on, "Kilo"),
        support(on, "Collins")
    );
    Ok(format!(
        "K = {:.6}, B = 1; discounted A = C = {:.4}, B = {:.4}",
        cmp.plain.conflict,
        bel(a),
        bel(b)
    ))
}

fn explanation_additivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xe4a1);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let (n, bpas) = {
            let n = rng.random_range(1..=8);
            let k = rng.random_range(2..=4);
            // Θ always focal, so every commonality is positive
            let bpas: Vec<oracle::Bpa> = (0..k).map(|_| oracle::random_bpa(&mut rng, n, 5, true)).collect();
            (n, bpas)
        };
        let m: Vec<MassFunction> = bpas.iter().map(|b| to_mass(n, b)).collect();
        let vacuous = MassFunction::vacuous(n);
        let ids: Vec<String> = (0..m.len()).map(|i| format!("b{i}")).collect();
        let mut contributions: Vec<(&str, &MassFunction)> = ids.iter().map(String::as_str).zip(&m).collect();
        // an id that sorts first, so ranking it last is not a tie-break accident
        contributions.insert(rng.random_range(0..=contributions.len()), ("a-vacuous", &vacuous));
        let report = influence("c", &contributions, FusionRule::Smets, DEFAULT_EXPLANATION_CAP).map_err(|e| e.to_string())?;
        ensure!(report.exact, "case {case}: lattice was truncated");
        let sum: f64 = report.entries.iter().map(|e| e.influence).sum();
        let combined = oracle::info_measure(&oracle::conjunctive(&bpas, n).into_iter().collect(), n);
        let d = (sum - combined).abs();
        ensure!(d <= 1e-6, "case {case}: Σ standalone {sum} vs combined {combined}");
        worst = worst.max(d);
        for (i, b) in bpas.iter().enumerate() {
            let e = report.entries.iter().find(|e| e.boe_id == ids[i]).unwrap();
            let want = oracle::info_measure(b, n);
            ensure!((e.influence - want).abs() <= 1e-6, "case {case}: I(b{i}) {} vs {want}", e.influence);
        }
        // every vacuous entry (the inserted one, plus any drawn at random)
        // sits at the tail with influence 0
        let vacuous_count = report.entries.iter().filter(|e| e.vacuous).count();
        let (head, tail) = report.entries.split_at(report.entries.len() - vacuous_count);
        ensure!(
            tail.iter().all(|e| e.vacuous && e.influence == 0.0) && head.iter().all(|e| e.influence > 0.0),
            "case {case}: ranking {:?}",
            report.entries
        );
        ensure!(tail.iter().any(|e| e.boe_id == "a-vacuous"), "case {case}: inserted vacuous BOE missing from the tail");
    }
    Ok(format!("200 instances, max error {worst:.1e}; vacuous always last at 0"))
}

fn dependent_rule() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xde9e);
    for case in 0..200 {
        let (n, bpas) = inputs(&mut rng, 8, 5, 2..=2);
        let (a, b) = (to_mass(n, &bpas[0]), to_mass(n, &bpas[1]));
        let same = fuse_dependent(&[&a, &a]).unwrap();
        ensure!(same == a, "case {case}: fuse(m, m) = {same:?}, m = {a:?}");
        let ab = fuse_dependent(&[&a, &b]).unwrap();
        let ba = fuse_dependent(&[&b, &a]).unwrap();
        ensure!(ab == ba, "case {case}: not commutative");
    }
    Ok("200 instances, idempotent and commutative exactly".into())
}

fn translation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a45);
    let mut routes = 0;
    let mut unreachable = 0;
    let mut worst: f64 = 0.0;
    for g in 0..100 {
        let nframes = rng.random_range(1..=16);
        let sizes: Vec<usize> = (0..nframes).map(|_| rng.random_range(2..=6)).collect();
        let mut gallery = FrameGallery::new();
        let frames: Vec<Frame> = sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| Frame::new(&format!("f{i}"), &format!("f{i}"), (0..s).map(|j| format!("f{i}.{j}")).collect()).unwrap())
            .collect();
        for f in &frames {
            gallery.add_frame(f.clone()).unwrap();
        }
        let mut adjacency = vec![Vec::new(); nframes];
        let density = rng.random_range(0.05..0.4);
        for a in 0..nframes {
            for b in a + 1..nframes {
                if !rng.random_bool(density) {
                    continue;
                }
                let pairs: Vec<(usize, usize)> = (0..rng.random_range(1..8))
                    .map(|_| (rng.random_range(0..sizes[a]), rng.random_range(0..sizes[b])))
                    .collect();
                let (x, y) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
                let pairs = if x == a { pairs } else { pairs.into_iter().map(|(p, q)| (q, p)).collect() };
                let rel = CompatibilityRelation::new(&frames[x], &frames[y], pairs).unwrap();
                gallery.insert_relation(rel, false).unwrap();
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for _ in 0..10 {
            let (from, to) = (rng.random_range(0..nframes), rng.random_range(0..nframes));
            let expected = oracle::bfs_distance(&adjacency, from, to);
            let (fid, tid) = (format!("f{from}"), format!("f{to}"));
            let path = gallery.translation_path(&fid, &tid);
            match (&path, expected) {
                (Ok(p), Some(d)) => ensure!(p.len() == d, "gallery {g}: {fid} -> {tid} path {} vs bfs {d}", p.len()),
                (Err(Error::UnreachableFrame { .. }), None) => {
                    unreachable += 1;
                    continue;
                }
                (p, d) => return Err(format!("gallery {g}: {fid} -> {tid}: {:?} vs bfs {d:?}", p.as_ref().map(Vec::len))),
            }
            let with_theta = rng.random_bool(0.5);
            let bpa = oracle::random_bpa(&mut rng, sizes[from], 4, with_theta);
            let boe = make_boe("x", &frames[from], bpa.iter().map(|&(s, m)| (PropSet::from_mask(s), m)), SourceMeta::new("s"))
                .unwrap();
            // hop by hop, then the whole route at once
            let mut m = boe.masses.clone();
            for hop in path.unwrap() {
                let before = m.total();
                m = translate(&m, hop.relation, hop.direction).map_err(|e| e.to_string())?.masses;
                worst = worst.max((m.total() - before).abs());
            }
            let t = gallery.translate_to(&boe, &tid, "y").map_err(|e| e.to_string())?;
            ensure!(t.path.len() == expected.unwrap() + 1, "gallery {g}: reported path {:?}", t.path);
            ensure!(t.boe.masses == m, "gallery {g}: route translation differs from hop-by-hop");
            let d = (t.boe.masses.total() - 1.0).abs();
            ensure!(d <= 1e-9, "gallery {g}: mass {} after translation", t.boe.masses.total());
            worst = worst.max(d);
            routes += 1;
        }
    }
    Ok(format!("100 galleries, {routes} routes and {unreachable} unreachable pairs agree with BFS; mass drift {worst:.1e}"))
}

fn performance() -> Outcome {
    let cfg = BenchConfig::default();
    let workload = bench::generate(&cfg);
    let sizes = workload.frame_sizes();
    ensure!(
        sizes.iter().min() == Some(&8) && sizes.iter().max() == Some(&352),
        "frame sizes {sizes:?}"
    );
    let counts = (workload.entries.len(), workload.discounts.len(), workload.translations.len(), workload.fusions.len());
    ensure!(counts == (35, 25, 29, 35), "operation counts {counts:?}");
    let mut s = Session::new(workload.kb.clone());
    for r in &workload.entries {
        s.apply(r.clone()).map_err(|e| e.to_string())?;
    }
    let widest = s.nodes().map(|n| n.boe.masses.len()).max().unwrap_or(0);
    ensure!(widest <= 64, "an entered BOE has {widest} focal sets");

    let report = bench::run(&cfg).map_err(|e| e.to_string())?;
    ensure!(report.total < Duration::from_secs(5), "took {:?}", report.total);
    Ok(format!("35 BOEs, 25 + 29 + 35 operations, frames 8-352, {:.2?}", report.total))
}

fn round_trips() -> Outcome {
    let kb = common::sample_kb();
    let text = kb.to_json_string();
    let back = KnowledgeBase::from_json_str(&text).map_err(|e| e.to_string())?;
    ensure!(back == kb && back.to_json_string() == text, "sample knowledge base changed on round trip");
    let wide = bench::generate(&BenchConfig::default()).kb;
    let back = KnowledgeBase::from_json_str(&wide.to_json_string()).map_err(|e| e.to_string())?;
    ensure!(back == wide, "generated knowledge base changed on round trip");

    let session = common::recorded_session();
    ensure!(session.node_count() == 35, "recorded session has {} nodes", session.node_count());
    let exported = session.export();
    let imported = Session::import(&exported).map_err(|e| e.to_string())?;
    ensure!(imported.export() == exported, "import then export is not the identity");
    let replayed = Session::replay(session.kb().clone(), session.log()).map_err(|e| e.to_string())?;
    let again = Session::replay(session.kb().clone(), session.log()).map_err(|e| e.to_string())?;
    ensure!(replayed.export() == exported && again.export() == exported, "replay is not deterministic");
    for (a, b) in session.nodes().zip(replayed.nodes()) {
        for ((sa, ma), (sb, mb)) in a.boe.masses.focal_sets().zip(b.boe.masses.focal_sets()) {
            ensure!(sa == sb && ma.to_bits() == mb.to_bits(), "node {} differs after replay", a.id);
        }
    }
    Ok(format!("knowledge bases identical; 35-node session replays bit for bit ({} log records)", session.log().len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("fusion oracle equivalence", oracle_equivalence),
        ("algebraic suite", algebraic_suite),
        ("commonality multiplicativity", commonality_multiplicativity),
        ("discount rates", discount_rates),
        ("zadeh scenario", zadeh),
        ("explanation additivity", explanation_additivity),
        ("dependent rule", dependent_rule),
        ("translation", translation),
        ("performance", performance),
        ("round trips and replay", round_trips),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
