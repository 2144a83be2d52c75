//! Maximal strategies, minimal nonfaces and the action relation.

use crate::bits::{self, Mask};
use crate::dowker::Relation;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Limits on exponential searches. Overflow is an error, never a truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_actions: usize,
    pub max_nodes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_actions: 20, max_nodes: 100_000 }
    }
}

struct Counter {
    limit: usize,
    used: usize,
    what: &'static str,
}

impl Counter {
    fn new(limit: usize, what: &'static str) -> Self {
        Counter { limit, used: 0, what }
    }

    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            return Err(Error::Budget { what: self.what, limit: self.limit });
        }
        Ok(())
    }
}

fn check_size(g: &Graph, budget: Budget) -> Result<()> {
    if g.n_actions() > budget.max_actions {
        return Err(Error::TooLarge { what: "action count for enumeration", limit: budget.max_actions });
    }
    Ok(())
}

/// Whether no further action of `g` can join the convergent set `s`.
pub fn is_maximal(g: &Graph, s: Mask) -> bool {
    bits::iter(g.all_actions() & !s).all(|a| g.contains_circuit(s | bits::bit(a)))
}

/// Inclusion-maximal convergent action sets, in lexicographic order.
pub fn maximal_strategies(g: &Graph, budget: Budget) -> Result<Vec<Mask>> {
    check_size(g, budget)?;
    let mut out = Vec::new();
    let mut counter = Counter::new(budget.max_nodes, "maximal strategy enumeration");
    extend_maximal(g, 0, 0, &mut out, &mut counter)?;
    out.sort_by(|&a, &b| bits::lex_cmp(a, b));
    Ok(out)
}

fn extend_maximal(g: &Graph, i: usize, s: Mask, out: &mut Vec<Mask>, counter: &mut Counter) -> Result<()> {
    counter.tick()?;
    if i == g.n_actions() {
        if is_maximal(g, s) {
            out.push(s);
        }
        return Ok(());
    }
    let with = s | bits::bit(i);
    if g.is_convergent(with) {
        extend_maximal(g, i + 1, with, out, counter)?;
        // leaving `i` out only pays off if some later action can block it
        let later = g.all_actions() & !bits::full(i + 1);
        if g.is_convergent(with | later) {
            return Ok(());
        }
    }
    extend_maximal(g, i + 1, s, out, counter)
}

/// States where the strategy specifies no action.
pub fn goal_set(g: &Graph, s: Mask) -> Mask {
    g.all_states() & !g.src(s)
}

/// Every singleton is the goal of some maximal strategy.
pub fn is_fully_controllable(g: &Graph, budget: Budget) -> Result<bool> {
    let goals: Mask = maximal_strategies(g, budget)?
        .into_iter()
        .map(|s| goal_set(g, s))
        .filter(|&m| bits::len(m) == 1)
        .fold(0, |acc, m| acc | m);
    Ok(goals == g.all_states())
}

/// Row key of an action set: ids joined by `+`, or `{}` when empty.
pub fn row_key(g: &Graph, s: Mask) -> String {
    if s == 0 {
        "{}".to_string()
    } else {
        g.action_ids(s).join("+")
    }
}

/// Maximal strategies against actions, with goal sets as row annotations.
/// Attribute `i` of the relation is action `i` of the graph.
pub fn action_relation(g: &Graph, budget: Budget) -> Result<Relation> {
    let rows = maximal_strategies(g, budget)?;
    let individuals = rows.iter().map(|&s| row_key(g, s)).collect();
    let attributes = g.actions().iter().map(|a| a.id.clone()).collect();
    let goals = rows.iter().map(|&s| g.state_ids(goal_set(g, s))).collect();
    Relation::with_goals(individuals, attributes, rows, goals)
}

/// Whether `m` is nonconvergent with every proper subset convergent.
pub fn is_minimal_nonface(g: &Graph, m: Mask) -> bool {
    g.contains_circuit(m) && bits::iter(m).all(|a| g.is_convergent(m & !bits::bit(a)))
}

/// All minimal nonconvergent action sets, in lexicographic order.
pub fn minimal_nonfaces(g: &Graph, budget: Budget) -> Result<Vec<Mask>> {
    check_size(g, budget)?;
    let mut out = Vec::new();
    let mut counter = Counter::new(budget.max_nodes, "minimal nonface enumeration");
    nonface_dfs(g, 0, 0, &mut out, &mut counter)?;
    out.sort_by(|&a, &b| bits::lex_cmp(a, b));
    Ok(out)
}

// Members of a minimal nonface have distinct sources, so only actions at a
// fresh source extend the current (convergent) set.
fn nonface_dfs(g: &Graph, from: usize, s: Mask, out: &mut Vec<Mask>, counter: &mut Counter) -> Result<()> {
    counter.tick()?;
    let used = g.src(s);
    for a in from..g.n_actions() {
        if bits::has(used, g.source(a)) {
            continue;
        }
        let t = s | bits::bit(a);
        if g.contains_circuit(t) {
            if bits::iter(s).all(|x| g.is_convergent(t & !bits::bit(x))) {
                out.push(t);
            }
        } else {
            nonface_dfs(g, a + 1, t, out, counter)?;
        }
    }
    Ok(())
}

/// A minimal nonface inside `a` that contains `keep`: the first candidate in
/// size-then-lexicographic order.
pub fn shrink_to_minimal_nonface(g: &Graph, a: Mask, keep: usize) -> Result<Mask> {
    if !bits::has(a, keep) {
        return Err(Error::Precondition("the kept action must belong to the set".into()));
    }
    if g.is_convergent(a) {
        return Err(Error::Precondition("the set is convergent".into()));
    }
    if g.contains_circuit(bits::bit(keep)) {
        return Err(Error::Precondition("the kept action is a circuit by itself".into()));
    }
    let others = a & !bits::bit(keep);
    for k in 1..=bits::len(others) {
        for c in bits::combinations(others, k) {
            let t = c | bits::bit(keep);
            if is_minimal_nonface(g, t) {
                return Ok(t);
            }
        }
    }
    Err(Error::Precondition("no minimal nonface inside the set contains the kept action".into()))
}

/// The lexicographically first maximal strategy among the smallest ones
/// that contain `base`.
pub fn smallest_maximal_extension(g: &Graph, base: Mask, budget: Budget) -> Result<Mask> {
    if g.contains_circuit(base) {
        return Err(Error::Precondition("cannot extend a nonconvergent set".into()));
    }
    maximal_strategies(g, budget)?
        .into_iter()
        .filter(|&s| s & base == base)
        .min_by(|&x, &y| bits::shortlex_cmp(x, y))
        .ok_or_else(|| Error::InvariantViolation("no maximal strategy contains a convergent set".into()))
}
