//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use iars_core::fixtures;
use iars_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RELATION_LIMIT: Duration = Duration::from_secs(5);
const BRUTE_LIMIT: Duration = Duration::from_secs(30);
const PROPERTY_LIMIT: Duration = Duration::from_secs(60);
const SEED: u64 = 0x1a25_2026;

type Outcome = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ids(g: &Graph, seq: &[usize]) -> Vec<String> {
    seq.iter().map(|&a| g.action(a).id.clone()).collect()
}

fn mask(g: &Graph, ids: &[&str]) -> Mask {
    g.action_mask(ids).unwrap()
}

fn big() -> Budget {
    Budget { max_actions: 64, max_nodes: 2_000_000 }
}

fn relation_reproduction() -> Outcome {
    let rows = [
        ("cycle4", 4),
        ("triangle_hub", 6),
        ("crossed_square", 5),
        ("triangle_fan", 7),
        ("twin_triangles", 10),
        ("det_spur", 5),
        ("stoch_triangle", 4),
        ("order_sensitive", 6),
        ("mixed_fan", 5),
        ("mixed_fan_sink", 10),
        ("mixed_fan4_sink", 32),
    ];
    for (id, n) in rows {
        let g = fixtures::graph(id).unwrap();
        let got = generated_rows(&g);
        let want = expected_set(&fixtures::expected_rows(id).unwrap());
        ensure(want.len() == n, || format!("{id}: expected relation has {} rows, pinned {n}", want.len()))?;
        ensure(got == want, || format!("{id}: generated {:?}\nexpected {:?}", got, want))?;
    }
    Ok(())
}

fn minimal_nonface_sets() -> Outcome {
    let named = |id: &str| -> BTreeSet<BTreeSet<String>> {
        let g = fixtures::graph(id).unwrap();
        minimal_nonfaces(&g, big()).unwrap().into_iter().map(|m| g.action_ids(m).into_iter().collect()).collect()
    };
    let set = |xs: &[&[&str]]| -> BTreeSet<BTreeSet<String>> {
        xs.iter().map(|x| x.iter().map(|s| s.to_string()).collect()).collect()
    };
    ensure(named("cycle4") == set(&[&["e1", "e2", "e3", "e4"]]), || format!("cycle4: {:?}", named("cycle4")))?;
    ensure(named("triangle_hub") == set(&[&["e1", "e2", "e3"], &["a2", "b4"]]), || format!("triangle_hub: {:?}", named("triangle_hub")))?;
    let table: BTreeSet<BTreeSet<String>> = (2..=5)
        .flat_map(|i| (2..=5).filter(move |&j| j != i).map(move |j| [format!("d{i}"), format!("e{j}")].into()))
        .collect();
    let de: BTreeSet<BTreeSet<String>> = named("mixed_fan4_sink")
        .into_iter()
        .filter(|k| k.iter().all(|a| a.starts_with('d') || a.starts_with('e')))
        .collect();
    ensure(de == table, || format!("mixed_fan4_sink d/e nonfaces: {de:?}"))
}

fn nondet_goldens() -> Outcome {
    let cases: [(&str, Option<&str>, &[&str], &[&str]); 3] = [
        ("triangle_fan", None, &["e1", "a1", "a2", "a3"], &["a2", "e1", "a3", "a1"]),
        ("det_spur", None, &["e2", "e4", "a2", "b1", "b2"], &["e2", "a2", "b2", "b1"]),
        ("twin_triangles", Some("flat"), &["e2", "e5", "a2", "a3", "a5", "a6"], &["e2", "e5", "a3", "a6", "a2", "a5"]),
    ];
    for (id, hname, sigma, want) in cases {
        let g = fixtures::graph(id).unwrap();
        let h = fixtures::hcg(id, hname).unwrap();
        let run = nondet_iars(&g, &h, mask(&g, sigma), big()).map_err(|e| format!("{id}: {e}"))?;
        ensure(ids(&g, &run.sequence) == want, || format!("{id}: got {:?}", ids(&g, &run.sequence)))?;
    }
    // every maximal strategy of every shipped hcg fixture
    for f in fixtures::GRAPHS.iter().filter(|f| !f.hcgs.is_empty()) {
        let g = fixtures::graph(f.id).unwrap();
        let rel = action_relation(&g, big()).unwrap();
        for (name, _) in f.hcgs {
            let h = fixtures::hcg(f.id, Some(name)).unwrap();
            for sigma in maximal_strategies(&g, big()).unwrap() {
                let run = nondet_iars(&g, &h, sigma, big())
                    .map_err(|e| format!("{} {name} {:?}: {e}", f.id, g.action_ids(sigma)))?;
                let need = if run.dissection.h_star_is_leaf { g.n_states() - 1 } else { g.n_states() };
                ensure(iars_oracle(&rel, &run.sequence) && run.sequence.len() >= need, || {
                    format!("{} {name}: {:?} (need {need})", f.id, ids(&g, &run.sequence))
                })?;
            }
        }
    }
    Ok(())
}

fn stochastic_goldens() -> Outcome {
    let g = fixtures::graph("stoch_triangle").unwrap();
    let run = stochastic_iars(&g, mask(&g, &["a1", "a2", "d2"]), big()).map_err(|e| e.to_string())?;
    ensure(ids(&g, &run.sequence) == ["a2", "d2"], || format!("stoch_triangle: {:?}", ids(&g, &run.sequence)))?;

    let g = fixtures::graph("twin_triangles").unwrap();
    let run = stochastic_iars(&g, mask(&g, &["e2", "e5", "a2", "a3", "a5", "a6"]), big()).map_err(|e| e.to_string())?;
    let s = ids(&g, &run.sequence);
    let as_set = |v: &[String]| v.iter().cloned().collect::<BTreeSet<_>>();
    let ok = s.len() == 5
        && s[0] == "e2"
        && as_set(&s[1..3]) == as_set(&["a5".into(), "a6".into()])
        && as_set(&s[3..5]) == as_set(&["a2".into(), "a3".into()]);
    ensure(ok, || format!("twin_triangles: {s:?}"))?;

    let g = fixtures::graph("order_sensitive").unwrap();
    let sigma = mask(&g, &["a2", "a3", "e3", "c2"]);
    let run = stochastic_iars(&g, sigma, big()).map_err(|e| e.to_string())?;
    let s = ids(&g, &run.sequence);
    let ok = s.len() == 3 && s[0] == "a3" && as_set(&s[1..]) == as_set(&["a2".into(), "e3".into()]);
    ensure(ok, || format!("order_sensitive: {s:?}"))?;
    let rel = action_relation(&g, big()).unwrap();
    let check = rel.is_iars_ids(&["a2", "e3", "a3"]).unwrap();
    ensure(!check.valid && !iars_oracle(&rel, &[0, 3, 1]), || "order_sensitive: a2,e3,a3 accepted".into())
}

fn counterexamples() -> Outcome {
    let longest = |id: &str, sigma: &[&str]| {
        let g = fixtures::graph(id).unwrap();
        brute_force_longest_iars(&g, mask(&g, sigma), big()).unwrap()
    };
    let l = longest("mixed_fan", &["c1", "a1"]);
    ensure(l.length == 2, || format!("mixed_fan: {}", l.length))?;
    let l = longest("mixed_fan_sink", &["a1", "d2", "d3", "d4", "c1"]);
    ensure(l.length == 3, || format!("mixed_fan_sink: {}", l.length))?;
    let l = longest("mixed_fan4_sink", &["a1", "d2", "d3", "d4", "d5", "c1"]);
    ensure(l.length == 4, || format!("mixed_fan4_sink: {}", l.length))?;
    let g = fixtures::graph("order_sensitive").unwrap();
    let rel = action_relation(&g, big()).unwrap();
    let sigma = mask(&g, &["a2", "a3", "e3", "c2"]);
    let n = count_full_iars(&rel, sigma, DEFAULT_NODE_LIMIT).unwrap();
    let by_oracle = permutations(&members(sigma)).iter().filter(|p| iars_oracle(&rel, p)).count();
    ensure(n == 12 && by_oracle == 12, || format!("order_sensitive full permutations: {n} (oracle {by_oracle})"))
}

fn property_circuits(rng: &mut ChaCha8Rng) -> Outcome {
    let mut cases = 0;
    while cases < 500 {
        let n = rng.gen_range(1..=5);
        let flavor = [Flavor::Nondet, Flavor::Stoch, Flavor::Mixed][cases % 3];
        let extra = rng.gen_range(0..=12 - n);
        let g = random_graph(rng, n, extra, flavor);
        let m: Mask = (0..g.n_actions()).filter(|_| rng.gen_bool(0.6)).fold(0, |m, a| m | 1 << a);
        let got = g.contains_circuit(m);
        ensure(got == circuit_oracle(&g, m), || format!("circuit mismatch on {:?}\n{}", g.action_ids(m), g.to_text()))?;
        cases += 1;
    }
    Ok(())
}

fn property_closure(rng: &mut ChaCha8Rng) -> Outcome {
    for _ in 0..1000 {
        let (rows, cols) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let rel = random_relation(rng, rows, cols);
        let all = rel.all_attributes();
        let a: Mask = rng.gen::<u128>() & all;
        let b: Mask = a | (rng.gen::<u128>() & all);
        let (ca, _) = rel.closure(a).unwrap();
        let (cb, _) = rel.closure(b).unwrap();
        let (cca, _) = rel.closure(ca).unwrap();
        let galois = rel.phi(&rel.psi(a).unwrap()).unwrap();
        let psi_ok = rel.psi(a).unwrap() == rel.psi(ca).unwrap();
        let ok = a & !ca == 0 && cca == ca && ca & !cb == 0 && ca == closure_oracle(&rel, a) && psi_ok;
        let ok = ok && (rel.psi(a).unwrap().is_empty() || galois == ca);
        ensure(ok, || format!("closure law fails for {:?} in {:?}", rel.attribute_ids(a), rel.rows()))?;
    }
    Ok(())
}

fn property_nonface_permutations(rng: &mut ChaCha8Rng) -> Outcome {
    let mut checked = 0;
    for _ in 0..300 {
        let (rows, cols) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let rel = random_relation(rng, rows, cols);
        for k in rel.minimal_nonfaces(big()).unwrap() {
            for p in permutations(&members(k)) {
                ensure(iars_oracle(&rel, &p) && rel.is_iars(&p).unwrap().valid, || {
                    format!("permutation {p:?} of nonface in {:?}", rel.rows())
                })?;
                checked += 1;
            }
        }
    }
    ensure(checked > 0, || "no nonfaces generated".into())
}

/// Recomputes the dissection laws from the public result.
fn dissection_laws(g: &Graph, d: &AcyclicDissection) -> Outcome {
    let size = (d.tau_o | d.tau_plus | d.tau_minus).count_ones() as usize;
    let want = if d.h_star_is_leaf { g.n_states() - 1 } else { g.n_states() };
    ensure(size == want, || format!("dissection size {size}, want {want}"))?;
    ensure(d.tau_o & !d.tau == 0 && d.xi & !d.tau == 0 && d.tau_minus & d.tau == 0, || "dissection parts".into())?;
    ensure(!circuit_oracle(g, d.tau_o | d.tau_plus), || "tau_o ∪ tau_plus has a circuit".into())
}

/// Recomputes the expansion laws from the public trace.
fn expansion_laws(g: &Graph, t: &ExpansionTrace) -> Outcome {
    let mut prev_states: Mask = 1 << g.source(t.steps[0].b);
    let mut prev_actions: Mask = 0;
    let mut union: Mask = 0;
    let mut probes = BTreeSet::new();
    for (i, s) in t.steps.iter().enumerate() {
        ensure(probes.insert(s.b), || "repeated probe".into())?;
        if i > 0 {
            ensure(prev_states & !s.states == 0 && s.states != prev_states, || "no strict growth".into())?;
        }
        let (sub, _) = g.subgraph(s.states, s.accumulated).map_err(|e| e.to_string())?;
        ensure(is_fully_controllable(&sub, big()).unwrap(), || "expansion not fully controllable".into())?;
        ensure(s.expansive & !(s.kappa & !prev_actions & !(1 << s.b)) == 0, || "expansive set escapes".into())?;
        let inside = members(s.expansive).iter().filter(|&&a| prev_states >> g.source(a) & 1 == 1).count();
        ensure(inside <= usize::from(i > 0), || "too many expansive sources inside".into())?;
        union |= s.expansive;
        prev_states = s.states;
        prev_actions = s.accumulated;
    }
    ensure(union.count_ones() + 1 == prev_states.count_ones(), || "cardinality law".into())
}

fn property_theorem(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut nondet_runs, mut stoch_runs) = (0, 0);
    for case in 0..240 {
        let n = rng.gen_range(2..=5);
        let flavor = if case % 2 == 0 { Flavor::Nondet } else { Flavor::Stoch };
        let extra = rng.gen_range(0..=4);
        let g = random_graph(rng, n, extra, flavor);
        if !is_fully_controllable(&g, big()).unwrap() {
            return Err(format!("generator produced an uncontrollable graph\n{}", g.to_text()));
        }
        let rel = action_relation(&g, big()).unwrap();
        let h = if g.purity().is_pure_nondeterministic() { Some(extract_hcg(&g, big()).unwrap()) } else { None };
        for sigma in maximal_strategies(&g, big()).unwrap() {
            let ctx = || format!("{:?} in\n{}", g.action_ids(sigma), g.to_text());
            if let Some(h) = &h {
                let run = nondet_iars(&g, h, sigma, big()).map_err(|e| format!("nondet {e}: {}", ctx()))?;
                ensure(iars_oracle(&rel, &run.sequence) && run.sequence.len() >= n - 1, || format!("nondet: {}", ctx()))?;
                ensure(run.sequence.iter().all(|&a| sigma >> a & 1 == 1), || format!("nondet outside sigma: {}", ctx()))?;
                dissection_laws(&g, &run.dissection).map_err(|e| format!("{e}: {}", ctx()))?;
                nondet_runs += 1;
            }
            if g.purity().is_pure_stochastic() {
                let run = stochastic_iars(&g, sigma, big()).map_err(|e| format!("stoch {e}: {}", ctx()))?;
                ensure(iars_oracle(&rel, &run.sequence) && run.sequence.len() == n - 1, || format!("stoch: {}", ctx()))?;
                for level in &run.levels {
                    if let Some(t) = &level.trace {
                        expansion_laws(&level.graph, t).map_err(|e| format!("{e}: {}", ctx()))?;
                    }
                }
                stoch_runs += 1;
            }
        }
    }
    ensure(nondet_runs >= 100 && stoch_runs >= 100, || format!("too few runs: {nondet_runs} / {stoch_runs}"))
}

fn dowker_narrative() -> Outcome {
    let lake = fixtures::relation("lake").unwrap();
    let m = lake.attribute_mask(&["H->L", "L->P"]).unwrap();
    let psi = lake.individual_ids(&lake.psi(m).unwrap());
    ensure(psi == ["pi1", "pi5"], || format!("psi: {psi:?}"))?;
    let (_, implied) = lake.closure(lake.attribute_mask(&["H->L", "R->P"]).unwrap()).unwrap();
    ensure(lake.attribute_ids(implied).contains(&"L->R".to_string()), || "L->R not implied".into())?;
    let ident = |x: &str| lake.is_identifiable(lake.individual_index(x).unwrap()).unwrap();
    ensure(!ident("pi1") && ident("pi3"), || "identifiability of pi1/pi3".into())?;

    let stream = fixtures::relation("stream").unwrap();
    let report = stream.face_report(big()).unwrap();
    let free: BTreeSet<Vec<String>> = report.free_faces.iter().map(|&f| stream.attribute_ids(f)).collect();
    let want: BTreeSet<Vec<String>> =
        [["d1", "d2"], ["d1", "d3"], ["d2", "d3"]].iter().map(|p| p.iter().map(|s| s.to_string()).collect()).collect();
    ensure(free == want, || format!("stream free faces: {free:?}"))?;

    let weak = fixtures::relation("weak_motor").unwrap();
    let m = weak.attribute_mask(&["f", "d2"]).unwrap();
    ensure(weak.psi(m).unwrap().is_empty(), || "weak motor psi nonempty".into())
}

#[test]
fn acceptance() {
    println!();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut criteria: Vec<(&str, Duration, Box<dyn FnMut() -> Outcome>)> = vec![
        ("fixture-exact action relations", RELATION_LIMIT, Box::new(relation_reproduction)),
        ("minimal nonface sets", RELATION_LIMIT, Box::new(minimal_nonface_sets)),
        ("nondeterministic constructor goldens", PROPERTY_LIMIT, Box::new(nondet_goldens)),
        ("stochastic constructor goldens", PROPERTY_LIMIT, Box::new(stochastic_goldens)),
        ("counterexample certification", BRUTE_LIMIT, Box::new(counterexamples)),
        ("dowker narrative checks", RELATION_LIMIT, Box::new(dowker_narrative)),
    ];
    let mut failed = Vec::new();
    for (name, limit, run) in criteria.iter_mut() {
        report(name, *limit, run, &mut failed);
    }
    // the randomized suites share one seeded stream and one time limit
    let start = Instant::now();
    let suites: [(&str, fn(&mut ChaCha8Rng) -> Outcome); 4] = [
        ("property (a) circuit peeling vs subset oracle", property_circuits),
        ("property (b) closure laws", property_closure),
        ("property (c) nonface permutations are release sequences", property_nonface_permutations),
        ("property (d,e) constructors and their invariants", property_theorem),
    ];
    for (name, suite) in suites {
        let mut run = || suite(&mut rng);
        report(name, PROPERTY_LIMIT, &mut run, &mut failed);
    }
    let total = start.elapsed();
    let line = if total <= PROPERTY_LIMIT { "PASS" } else { "FAIL" };
    println!("{line} property suites total time ({:.2?} <= {:?})", total, PROPERTY_LIMIT);
    if total > PROPERTY_LIMIT {
        failed.push("property suites total time");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

fn report<'a>(name: &'a str, limit: Duration, run: &mut dyn FnMut() -> Outcome, failed: &mut Vec<&'a str>) {
    let start = Instant::now();
    let out = run();
    let took = start.elapsed();
    match out {
        Ok(()) if took <= limit => println!("PASS {name} ({took:.2?})"),
        Ok(()) => {
            println!("FAIL {name}: took {took:.2?}, limit {limit:?}");
            failed.push(name);
        }
        Err(e) => {
            println!("FAIL {name}: {e}");
            failed.push(name);
        }
    }
}
