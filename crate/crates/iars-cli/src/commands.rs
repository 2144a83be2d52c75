//! Subcommand bodies. Each returns the text written to stdout.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use iars_core::{
    action_relation, acyclic_dissection, extract_hcg, fixtures, goal_set, is_fully_controllable,
    longest_iars, maximal_strategies, minimal_nonfaces, nondet_iars, row_key, stochastic_iars, validate_hcg, Budget,
    Graph, Hcg, Mask, Relation, RevealSession, SessionView,
};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::input::{id_list, Source};

fn set_text(ids: &[String]) -> String {
    format!("{{{}}}", ids.join(", "))
}

fn action_set(g: &Graph, list: &str) -> CliResult<Mask> {
    Ok(g.action_mask(&id_list(list))?)
}

fn seq_ids(g: &Graph, seq: &[usize]) -> Vec<String> {
    seq.iter().map(|&a| g.action(a).id.clone()).collect()
}

pub fn parse(g: &Graph) -> String {
    format!(
        "# states: {}, actions: {}, purity: {:?}\n{}",
        g.n_states(),
        g.n_actions(),
        g.purity(),
        g.to_text()
    )
}

pub fn strategies(g: &Graph, budget: Budget) -> CliResult<String> {
    let mut out = String::new();
    for s in maximal_strategies(g, budget)? {
        let _ = writeln!(out, "{}\tgoal {}", row_key(g, s), set_text(&g.state_ids(goal_set(g, s))));
    }
    Ok(out)
}

pub fn relation(g: &Graph, budget: Budget) -> CliResult<String> {
    Ok(action_relation(g, budget)?.to_csv())
}

pub fn nonfaces(src: &Source, budget: Budget) -> CliResult<String> {
    let mut out = String::new();
    match src {
        Source::Graph(g) => {
            for k in minimal_nonfaces(g, budget)? {
                let _ = writeln!(out, "{}", set_text(&g.action_ids(k)));
            }
        }
        Source::Relation(rel) => {
            let report = rel.face_report(budget)?;
            for (label, sets) in [("free", &report.free_faces), ("nonface", &report.minimal_nonfaces)] {
                for &f in sets {
                    let _ = writeln!(out, "{label}\t{}", set_text(&rel.attribute_ids(f)));
                }
            }
            for &y in &report.cone_apexes {
                let _ = writeln!(out, "apex\t{}", rel.attributes()[y]);
            }
        }
    }
    Ok(out)
}

pub fn controllable(g: &Graph, budget: Budget) -> CliResult<String> {
    Ok(format!("{}\n", is_fully_controllable(g, budget)?))
}

pub fn hcg_extract(g: &Graph, budget: Budget) -> CliResult<String> {
    Ok(extract_hcg(g, budget)?.to_text())
}

pub fn hcg_validate(g: &Graph, h: &Hcg) -> CliResult<String> {
    let report = validate_hcg(h, g);
    if report.valid {
        return Ok("valid\n".into());
    }
    let mut out = String::from("invalid\n");
    for d in &report.diagnostics {
        let _ = writeln!(out, "({}) {}", d.clause, d.message);
    }
    Err(CliError::Rejected(out.trim_end().to_string()))
}

pub fn dissect(g: &Graph, h: &Hcg, tau: &str) -> CliResult<String> {
    let d = acyclic_dissection(g, h, action_set(g, tau)?)?;
    Ok(format!("{}\n", serde_json::to_string_pretty(&d.to_json(g, h)).expect("json values serialize")))
}

fn sigmas(g: &Graph, sigma: Option<&str>, budget: Budget) -> CliResult<Vec<Mask>> {
    match sigma {
        Some(s) => Ok(vec![action_set(g, s)?]),
        None => Ok(maximal_strategies(g, budget)?),
    }
}

/// Runs the nondeterministic construction on one strategy, or on every
/// maximal strategy when none is given.
pub fn iars_nondet(g: &Graph, h: Option<&Hcg>, sigma: Option<&str>, json: bool, budget: Budget) -> CliResult<String> {
    let owned;
    let h = match h {
        Some(h) => h,
        None => {
            owned = extract_hcg(g, budget)?;
            &owned
        }
    };
    let mut out = String::new();
    let mut docs = Vec::new();
    for s in sigmas(g, sigma, budget)? {
        let run = nondet_iars(g, h, s, budget)?;
        let seq = seq_ids(g, &run.sequence);
        if json {
            docs.push(json!({
                "sigma": g.action_ids(s),
                "sequence": seq,
                "dissection": run.dissection.to_json(g, h),
            }));
        } else if sigma.is_some() {
            let _ = writeln!(out, "{}", seq.join(","));
        } else {
            let _ = writeln!(out, "{}\t{}", row_key(g, s), seq.join(","));
        }
    }
    if json {
        out = format!("{}\n", serde_json::to_string_pretty(&docs).expect("json values serialize"));
    }
    Ok(out)
}

pub fn iars_stoch(g: &Graph, sigma: Option<&str>, trace: bool, budget: Budget) -> CliResult<String> {
    let mut out = String::new();
    let mut docs = Vec::new();
    for s in sigmas(g, sigma, budget)? {
        let run = stochastic_iars(g, s, budget)?;
        let seq = seq_ids(g, &run.sequence);
        if trace {
            docs.push(run.to_json());
        } else if sigma.is_some() {
            let _ = writeln!(out, "{}", seq.join(","));
        } else {
            let _ = writeln!(out, "{}\t{}", row_key(g, s), seq.join(","));
        }
    }
    if trace {
        out = format!("{}\n", serde_json::to_string_pretty(&docs).expect("json values serialize"));
    }
    Ok(out)
}

fn relation_of(src: &Source, budget: Budget) -> CliResult<Relation> {
    match src {
        Source::Graph(g) => Ok(action_relation(g, budget)?),
        Source::Relation(r) => Ok(r.clone()),
    }
}

pub fn iars_verify(src: &Source, seq: &str, budget: Budget) -> CliResult<String> {
    let rel = relation_of(src, budget)?;
    let ids = id_list(seq);
    let check = rel.is_iars_ids(&ids)?;
    match check.first_failure {
        None => Ok("valid\n".into()),
        Some(i) => Err(CliError::Rejected(format!(
            "invalid: {} (position {i}) is implied by the attributes before it",
            ids[i - 1]
        ))),
    }
}

pub fn iars_longest(src: &Source, within: Option<&str>, limit: usize, budget: Budget) -> CliResult<String> {
    let (length, witness) = match src {
        Source::Graph(g) => {
            let sigma = within.ok_or_else(|| CliError::Input("--sigma is required for a graph".into()))?;
            let best = longest_iars(&action_relation(g, budget)?, action_set(g, sigma)?, limit)?;
            (best.length, seq_ids(g, &best.witness))
        }
        Source::Relation(rel) => {
            let m = match within {
                Some(w) => rel.attribute_mask(&id_list(w))?,
                None => rel.all_attributes(),
            };
            let best = longest_iars(rel, m, limit)?;
            (best.length, best.witness.iter().map(|&y| rel.attributes()[y].clone()).collect())
        }
    };
    Ok(format!("length {length}\nwitness {}\n", witness.join(",")))
}

fn view_text(v: &SessionView) -> String {
    let mut out = String::new();
    let flags: Vec<String> = v
        .revealed
        .iter()
        .zip(&v.informative)
        .map(|(y, &i)| if i { y.clone() } else { format!("{y}(implied)") })
        .collect();
    let _ = writeln!(out, "revealed    {}", flags.join(" "));
    let _ = writeln!(out, "consistent  {}", v.consistent.join(" "));
    let _ = writeln!(out, "implied     {}", v.implied.join(" "));
    if !v.goal_candidates.is_empty() {
        let goals: Vec<String> = v.goal_candidates.iter().map(|g| set_text(g)).collect();
        let _ = writeln!(out, "goals       {}", goals.join(" "));
    }
    if v.inconsistent {
        let _ = writeln!(out, "INCONSISTENT: no row has every revealed attribute");
    }
    out
}

/// Line-oriented reveal loop: each line names an attribute; `view` reprints
/// the state, `quit` or end of input stops.
pub fn reveal_repl<R: BufRead, W: Write>(rel: Relation, input: R, mut out: W) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io { path: "<stdout>".into(), source: e };
    let mut session = RevealSession::start(rel);
    writeln!(out, "attributes  {}", session.relation().attributes().join(" ")).map_err(io)?;
    write!(out, "{}", view_text(&session.view())).map_err(io)?;
    for line in input.lines() {
        let line = line.map_err(|e| CliError::Io { path: "<stdin>".into(), source: e })?;
        let cmd = line.trim();
        match cmd {
            "" => continue,
            "quit" | "exit" => break,
            "view" => write!(out, "{}", view_text(&session.view())).map_err(io)?,
            y => match session.reveal(y) {
                Ok(informative) => {
                    let tag = if informative { "informative" } else { "non-informative" };
                    writeln!(out, "{y}: {tag}").map_err(io)?;
                    write!(out, "{}", view_text(&session.view())).map_err(io)?;
                }
                Err(e) => writeln!(out, "error: {e}").map_err(io)?,
            },
        }
    }
    Ok(())
}

pub fn fixtures_list() -> String {
    let mut out = String::new();
    for f in fixtures::GRAPHS {
        let hcgs: Vec<&str> = f.hcgs.iter().map(|(n, _)| *n).collect();
        let _ = writeln!(out, "graph\t{}\thcgs: {}", f.id, if hcgs.is_empty() { "-".into() } else { hcgs.join(",") });
    }
    for f in fixtures::RELATIONS {
        let _ = writeln!(out, "relation\t{}", f.id);
    }
    out
}

/// Regenerates each graph fixture's relation against its expected rows and
/// runs the applicable constructors on every maximal strategy.
pub fn fixtures_run(only: Option<&str>, budget: Budget) -> CliResult<String> {
    let mut out = String::new();
    let mut failures = 0;
    let selected: Vec<_> = fixtures::GRAPHS.iter().filter(|f| only.is_none_or(|id| id == f.id)).collect();
    if selected.is_empty() {
        return Err(CliError::Input(format!("no graph fixture named {}", only.unwrap_or(""))));
    }
    for f in selected {
        let g = fixtures::graph(f.id)?;
        let rel = action_relation(&g, budget)?;
        let goals = rel.goals().unwrap_or(&[]);
        let mut got: Vec<(Vec<String>, Vec<String>)> = rel
            .rows()
            .iter()
            .zip(goals)
            .map(|(&r, gl)| (sorted(rel.attribute_ids(r)), sorted(gl.clone())))
            .collect();
        got.sort();
        let mut want: Vec<(Vec<String>, Vec<String>)> =
            fixtures::expected_rows(f.id)?.into_iter().map(|r| (r.actions, r.goal)).collect();
        want.sort();
        let ok = got == want;
        failures += usize::from(!ok);
        let _ = writeln!(out, "{}\t{}\trelation ({} rows)", if ok { "ok" } else { "MISMATCH" }, f.id, got.len());

        let mut runs = Vec::new();
        if g.purity().is_pure_nondeterministic() && is_fully_controllable(&g, budget)? {
            let mut hs: Vec<(String, Hcg)> =
                f.hcgs.iter().map(|(n, _)| Ok((n.to_string(), fixtures::hcg(f.id, Some(n))?))).collect::<CliResult<_>>()?;
            hs.push(("extracted".into(), extract_hcg(&g, budget)?));
            for (name, h) in hs {
                runs.push((format!("nondet/{name}"), run_all(&g, budget, |s| Ok(nondet_iars(&g, &h, s, budget)?.sequence))));
            }
        }
        if g.purity().is_pure_stochastic() && is_fully_controllable(&g, budget)? {
            runs.push(("stoch".into(), run_all(&g, budget, |s| Ok(stochastic_iars(&g, s, budget)?.sequence))));
        }
        for (name, res) in runs {
            match res {
                Ok((n, min_len)) => {
                    let _ = writeln!(out, "ok\t{}\t{name}: {n} strategies, shortest sequence {min_len}", f.id);
                }
                Err(e) => {
                    failures += 1;
                    let _ = writeln!(out, "FAIL\t{}\t{name}: {e}", f.id);
                }
            }
        }
    }
    if failures > 0 {
        return Err(CliError::Rejected(format!("{out}{failures} failure(s)")));
    }
    Ok(out)
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

fn run_all(g: &Graph, budget: Budget, f: impl Fn(Mask) -> CliResult<Vec<usize>>) -> CliResult<(usize, usize)> {
    let all = maximal_strategies(g, budget)?;
    let mut shortest = usize::MAX;
    for &s in &all {
        shortest = shortest.min(f(s)?.len());
    }
    Ok((all.len(), shortest))
}
