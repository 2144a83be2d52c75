//! Independent reference implementations used to check the library.
#![allow(dead_code)]

use std::collections::BTreeSet;

use iars_core::fixtures::ExpectedRow;
use iars_core::{Graph, Kind, Mask, Relation};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn members(m: Mask) -> Vec<usize> {
    (0..128).filter(|&i| m >> i & 1 == 1).collect()
}

fn mask_of(v: &[usize]) -> Mask {
    v.iter().fold(0, |m, &i| m | 1u128 << i)
}

/// Leaves the source set `w` in one step, read straight from the action data.
fn leaves(g: &Graph, a: usize, w: &BTreeSet<usize>) -> bool {
    let act = &g.actions()[a];
    match act.kind {
        Kind::Stochastic => act.targets.iter().any(|t| !w.contains(t)),
        _ => act.targets.iter().all(|t| !w.contains(t)),
    }
}

/// A set contains a circuit iff some nonempty subset has no action leaving
/// that subset's sources. Tries every subset.
pub fn circuit_oracle(g: &Graph, m: Mask) -> bool {
    let acts = members(m);
    (1u64..1 << acts.len()).any(|pick| {
        let sub: Vec<usize> = (0..acts.len()).filter(|&i| pick >> i & 1 == 1).map(|i| acts[i]).collect();
        let w: BTreeSet<usize> = sub.iter().map(|&a| g.actions()[a].source).collect();
        sub.iter().all(|&a| !leaves(g, a, &w))
    })
}

/// Maximal strategies by scanning every action subset.
pub fn maximal_strategies_oracle(g: &Graph) -> BTreeSet<Mask> {
    let n = g.n_actions();
    let conv: Vec<Mask> = (0u128..1 << n).filter(|&m| !circuit_oracle(g, m)).collect();
    let set: BTreeSet<Mask> = conv.iter().copied().collect();
    conv.iter()
        .copied()
        .filter(|&m| (0..n).all(|a| m >> a & 1 == 1 || !set.contains(&(m | 1 << a))))
        .collect()
}

/// Rows of `g`'s action relation as (sorted action ids, sorted goal ids).
pub fn generated_rows(g: &Graph) -> BTreeSet<(Vec<String>, Vec<String>)> {
    let rel = iars_core::action_relation(g, iars_core::Budget { max_actions: 64, max_nodes: 1_000_000 }).unwrap();
    let goals = rel.goals().unwrap();
    rel.rows()
        .iter()
        .zip(goals)
        .map(|(&r, goal)| {
            let mut a = rel.attribute_ids(r);
            a.sort();
            let mut gl = goal.clone();
            gl.sort();
            (a, gl)
        })
        .collect()
}

pub fn expected_set(rows: &[ExpectedRow]) -> BTreeSet<(Vec<String>, Vec<String>)> {
    rows.iter().map(|r| (r.actions.clone(), r.goal.clone())).collect()
}

/// Attributes shared by every row that has all of `m`.
pub fn closure_oracle(rel: &Relation, m: Mask) -> Mask {
    let ys: Vec<usize> = members(m);
    let mut out = mask_of(&(0..rel.n_attributes()).collect::<Vec<_>>());
    for &row in rel.rows() {
        if ys.iter().all(|&y| row >> y & 1 == 1) {
            out &= row;
        }
    }
    out
}

/// Each element must lie outside the closure of the elements before it.
pub fn iars_oracle(rel: &Relation, seq: &[usize]) -> bool {
    let mut prior: Vec<usize> = Vec::new();
    for &y in seq {
        if prior.contains(&y) || closure_oracle(rel, mask_of(&prior)) >> y & 1 == 1 {
            return false;
        }
        prior.push(y);
    }
    true
}

pub fn permutations(v: &[usize]) -> Vec<Vec<usize>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Random relation with `rows` individuals over `cols` attributes.
pub fn random_relation(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Relation {
    let individuals = (0..rows).map(|i| format!("x{i}")).collect();
    let attributes = (0..cols).map(|i| format!("y{i}")).collect();
    let data = (0..rows)
        .map(|_| (0..cols).filter(|_| rng.gen_bool(0.5)).fold(0u128, |m, c| m | 1 << c))
        .collect();
    Relation::new(individuals, attributes, data).unwrap()
}

/// Which action kinds a random graph may use besides deterministic ones.
#[derive(Clone, Copy, Debug)]
pub enum Flavor {
    Nondet,
    Stoch,
    Mixed,
}

/// Random graph on `n` states: a deterministic cycle through a random state
/// order plus `extra` random actions. The cycle keeps it fully controllable.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize, flavor: Flavor) -> Graph {
    let mut order: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut text = format!("states: {}\n", (1..=n).map(|s| s.to_string()).collect::<Vec<_>>().join(" "));
    for i in 0..n {
        text += &format!("action c{} det {} -> {}\n", i + 1, order[i], order[(i + 1) % n]);
    }
    for j in 0..extra {
        let src = rng.gen_range(1..=n);
        let mut targets: Vec<usize> = (1..=n).filter(|_| rng.gen_bool(0.45)).collect();
        if targets.is_empty() || targets == [src] {
            targets = vec![src % n + 1];
        }
        let stoch = match flavor {
            Flavor::Nondet => false,
            Flavor::Stoch => true,
            Flavor::Mixed => rng.gen_bool(0.5),
        };
        let id = format!("x{}", j + 1);
        if targets.len() == 1 {
            text += &format!("action {id} det {src} -> {}\n", targets[0]);
        } else if stoch {
            let k = targets.len() as i64;
            let body: Vec<String> = targets.iter().map(|t| format!("{t}: 1/{k}")).collect();
            text += &format!("action {id} stoch {src} -> {{ {} }}\n", body.join(", "));
        } else {
            let body: Vec<String> = targets.iter().map(|t| t.to_string()).collect();
            text += &format!("action {id} nondet {src} -> {{ {} }}\n", body.join(", "));
        }
    }
    iars_core::parse_graph(&text).unwrap()
}
