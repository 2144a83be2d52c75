use std::io::Write;
use std::process::{Command, Output, Stdio};

use iars_cli::commands;
use iars_cli::input::Source;
use iars_core::{action_relation, fixtures, longest_iars, maximal_strategies, nondet_iars, Budget, RevealSession};

fn iars(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iars")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = iars(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn nondet_sequence_for_a_single_strategy() {
    let out = stdout(&["iars", "nondet", "fixture:triangle_fan", "--hcg", "fixture:triangle_fan", "--sigma", "e1,a1,a2,a3"]);
    assert_eq!(out, "a2,e1,a3,a1\n");
}

#[test]
fn stochastic_sequence_for_a_single_strategy() {
    let out = stdout(&["iars", "stoch", "fixture:det_spur", "--sigma", "e2,e4,a2,b1,b2"]);
    assert_eq!(out.trim().split(',').count(), 3);
    let verdict = stdout(&["iars", "verify", "fixture:det_spur", "--seq", out.trim()]);
    assert_eq!(verdict, "valid\n");
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["iars", "nondet", "fixture:twin_triangles", "--json"][..],
        &["iars", "stoch", "fixture:order_sensitive", "--trace"][..],
        &["relation", "fixture:mixed_fan4_sink"][..],
        &["nonfaces", "fixture:lake"][..],
    ] {
        assert_eq!(stdout(args), stdout(args), "{args:?}");
    }
}

#[test]
fn regenerated_relation_round_trips_through_csv() {
    let csv = stdout(&["relation", "fixture:twin_triangles"]);
    let dir = std::env::temp_dir().join(format!("iars-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("twin_triangles.csv");
    std::fs::write(&path, &csv).unwrap();
    assert_eq!(stdout(&["relation", path.to_str().unwrap()]), csv);
    let longest = stdout(&["iars", "longest", path.to_str().unwrap()]);
    assert!(longest.starts_with("length "), "{longest}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_rejects_an_implied_attribute() {
    let out = iars(&["iars", "verify", "fixture:triangle_hub_goals", "--seq", "a2,e1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("invalid"));
}

#[test]
fn missing_file_reports_error() {
    let out = iars(&["parse", "/nonexistent/graph.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/graph.txt"));
}

#[test]
fn budget_flag_limits_search() {
    let out = iars(&["--max-actions", "3", "strategies", "fixture:twin_triangles"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn hcg_commands() {
    assert_eq!(stdout(&["hcg", "validate", "fixture:twin_triangles", "fixture:twin_triangles/flat"]), "valid\n");
    let extracted = stdout(&["hcg", "extract", "fixture:triangle_hub"]);
    assert!(!extracted.is_empty());
    let out = iars(&["hcg", "validate", "fixture:triangle_fan", "fixture:twin_triangles/flat"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fixtures_run_passes() {
    let out = stdout(&["fixtures", "run"]);
    assert!(!out.contains("MISMATCH") && !out.contains("FAIL"), "{out}");
    assert!(stdout(&["fixtures", "list"]).contains("relation\tnarrow"));
}

#[test]
fn reveal_repl_over_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_iars"))
        .args(["reveal", "fixture:triangle_hub_goals"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"a2\ne1\nzz\nquit\n").unwrap();
    let out = String::from_utf8(child.wait_with_output().unwrap().stdout).unwrap();
    assert!(out.contains("a2: informative"), "{out}");
    assert!(out.contains("e1: non-informative"), "{out}");
    assert!(out.contains("error: "), "{out}");
    assert!(out.contains("consistent  sigma4\n"), "{out}");
}

#[test]
fn repl_function_matches_binary() {
    let rel = fixtures::relation("narrow").unwrap();
    let mut buf = Vec::new();
    commands::reveal_repl(rel, &b"u2\nf\n"[..], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.ends_with("revealed    u2 f\nconsistent  sigma12 sigma2\nimplied     \n"), "{text}");
}

/// Revealing a sequence one attribute at a time flags a non-informative
/// step exactly where the verifier reports its first failure.
#[test]
fn session_agrees_with_verifier() {
    let budget = Budget::default();
    for f in fixtures::GRAPHS {
        let g = fixtures::graph(f.id).unwrap();
        let rel = action_relation(&g, budget).unwrap();
        for s in maximal_strategies(&g, budget).unwrap() {
            let ids = g.action_ids(s);
            let mut session = RevealSession::start(rel.clone());
            let mut first_flag = None;
            for (i, y) in ids.iter().enumerate() {
                if !session.reveal(y).unwrap() && first_flag.is_none() {
                    first_flag = Some(i + 1);
                }
            }
            assert_eq!(rel.is_iars_ids(&ids).unwrap().first_failure, first_flag, "{} {ids:?}", f.id);
        }
    }
}

/// No constructor output is longer than the exhaustive optimum.
#[test]
fn exhaustive_search_bounds_constructions() {
    let budget = Budget::default();
    for f in fixtures::GRAPHS.iter().filter(|f| !f.hcgs.is_empty()) {
        let g = fixtures::graph(f.id).unwrap();
        let rel = action_relation(&g, budget).unwrap();
        let h = fixtures::hcg(f.id, None).unwrap();
        for s in maximal_strategies(&g, budget).unwrap() {
            let built = nondet_iars(&g, &h, s, budget).unwrap().sequence.len();
            let best = longest_iars(&rel, s, iars_core::DEFAULT_NODE_LIMIT).unwrap().length;
            assert!(best >= built, "{} {:?}: {best} < {built}", f.id, g.action_ids(s));
        }
    }
}

#[test]
fn nonfaces_of_a_relation_source() {
    let out = commands::nonfaces(&Source::Relation(fixtures::relation("lake").unwrap()), Budget::default()).unwrap();
    assert!(out.lines().any(|l| l == "nonface\t{H->L, H->R}"), "{out}");
}
