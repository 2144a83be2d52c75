//! Minimal-nonface expansion and release sequences for pure stochastic graphs.

use serde_json::{json, Value};

use crate::bits::{self, Mask};
use crate::error::{Error, Result};
use crate::graph::{Graph, QuotientMap};
use crate::strategy::{self, Budget};

/// One round of the expansion loop. Masks refer to the original graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionStep {
    /// probe action
    pub b: usize,
    /// minimal nonface through the probe
    pub kappa: Mask,
    /// union of the nonfaces so far
    pub accumulated: Mask,
    /// sources of `accumulated`
    pub states: Mask,
    /// strategy actions sourced outside `states`
    pub xi: Mask,
    /// lift of the maximal extension chosen in the quotient
    pub tau: Mask,
    /// expansive set, filled in by [`expansive_sets`]
    pub expansive: Mask,
}

#[derive(Debug, Clone)]
pub struct ExpansionTrace {
    pub goal: usize,
    pub steps: Vec<ExpansionStep>,
    /// the graph with the final state set collapsed to one state
    pub quotient: Graph,
    pub map: QuotientMap,
    /// maximal strategy of `quotient` extending the projected `xi`
    pub tau_prime: Mask,
}

/// One recursion level of [`stochastic_iars`].
#[derive(Debug, Clone)]
pub struct Level {
    pub graph: Graph,
    pub sigma: Mask,
    /// `None` on a two-state graph, which needs no expansion
    pub trace: Option<ExpansionTrace>,
    /// the sequence for this level, in its own action indices
    pub sequence: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct StochasticRun {
    pub sequence: Vec<usize>,
    pub levels: Vec<Level>,
}

fn first(m: Mask) -> Option<usize> {
    bits::iter(m).next()
}

fn check_inputs(g: &Graph, sigma: Mask, budget: Budget) -> Result<()> {
    if !g.purity().is_pure_stochastic() {
        return Err(Error::Precondition("the graph must be pure stochastic".into()));
    }
    if g.n_states() < 2 {
        return Err(Error::Precondition("at least two states are required".into()));
    }
    if sigma & !g.all_actions() != 0 {
        return Err(Error::UnknownAction("outside the graph".into()));
    }
    if g.contains_circuit(sigma) || !strategy::is_maximal(g, sigma) {
        return Err(Error::Precondition("sigma must be a maximal strategy".into()));
    }
    if !strategy::is_fully_controllable(g, budget)? {
        return Err(Error::Precondition("the graph is not fully controllable".into()));
    }
    Ok(())
}

/// Runs the expansion loop; expansive sets are left empty.
pub fn expand_min_nonfaces(g: &Graph, sigma: Mask, budget: Budget) -> Result<ExpansionTrace> {
    check_inputs(g, sigma, budget)?;
    let goal = first(g.all_states() & !g.src(sigma))
        .ok_or_else(|| Error::InvariantViolation("a maximal strategy has no goal state".into()))?;
    let b1 = (0..g.n_actions())
        .find(|&a| g.source(a) == goal && g.is_convergent(bits::bit(a)))
        .ok_or_else(|| Error::InvariantViolation("no convergent action leaves the goal state".into()))?;

    let mut steps = Vec::new();
    let mut b = b1;
    let mut accumulated: Mask = 0;
    loop {
        let kappa = strategy::shrink_to_minimal_nonface(g, sigma | bits::bit(b), b)?;
        accumulated |= kappa;
        let states = g.src(accumulated);
        let (q, map) = g.quotient(&[states], false)?;
        let xi = bits::iter(sigma)
            .filter(|&a| !bits::has(states, g.source(a)))
            .fold(0, |m, a| m | bits::bit(a));
        let tau_prime = strategy::smallest_maximal_extension(&q, map.project(xi), budget)?;
        let tau = map.lift(tau_prime);
        steps.push(ExpansionStep { b, kappa, accumulated, states, xi, tau, expansive: 0 });
        match first(tau & !sigma) {
            None => {
                return Ok(ExpansionTrace { goal, steps, quotient: q, map, tau_prime });
            }
            Some(next) => {
                if steps.iter().any(|s| s.b == next) {
                    return Err(Error::InvariantViolation(format!(
                        "probe {} repeats",
                        g.action(next).id
                    )));
                }
                b = next;
            }
        }
    }
}

/// Chooses the expansive set of every step.
pub fn expansive_sets(g: &Graph, trace: &ExpansionTrace) -> Result<ExpansionTrace> {
    let mut out = trace.clone();
    for i in 0..out.steps.len() {
        let step = &out.steps[i];
        let e = if i == 0 {
            step.kappa & !bits::bit(step.b)
        } else {
            let prev = &out.steps[i - 1];
            expansive_set(g, step.b, step.kappa, prev.accumulated, prev.states, step.states)?
        };
        out.steps[i].expansive = e;
    }
    Ok(out)
}

fn expansive_set(g: &Graph, b: usize, kappa: Mask, prev_actions: Mask, prev_states: Mask, states: Mask) -> Result<Mask> {
    let want = bits::len(states & !prev_states);
    let pool = kappa & !prev_actions & !bits::bit(b);
    let outside = bits::iter(pool)
        .filter(|&a| !bits::has(prev_states, g.source(a)))
        .fold(0, |m, a| m | bits::bit(a));
    if bits::len(outside) == want {
        return Ok(outside);
    }
    if bits::len(outside) + 1 != want {
        return Err(Error::InvariantViolation("expansive set has the wrong size".into()));
    }
    // backchain from the probe's source until an action sourced in the
    // previous state set feeds the chain
    let kappa_states = g.src(kappa);
    let mut chain = bits::bit(b);
    loop {
        let reached = g.src(chain);
        let feeds = bits::iter(kappa & !prev_actions)
            .filter(|&a| {
                let s = g.source(a);
                bits::has(kappa_states & !reached, s) && g.targets(a) & reached != 0
            })
            .fold(0, |m, a| m | bits::bit(a));
        let inside = bits::iter(feeds).find(|&a| bits::has(prev_states, g.source(a)));
        if let Some(e) = inside {
            return Ok(outside | bits::bit(e));
        }
        match first(feeds & outside) {
            Some(a) => chain |= bits::bit(a),
            None => {
                return Err(Error::InvariantViolation(format!(
                    "backchaining from {} found no boundary action",
                    g.action(b).id
                )))
            }
        }
    }
}

/// Checks the structural laws of a completed trace.
pub fn check_trace(g: &Graph, trace: &ExpansionTrace, budget: Budget) -> Result<()> {
    let bad = |m: String| Err(Error::InvariantViolation(m));
    let mut prev_states = bits::bit(trace.steps.first().map_or(0, |s| g.source(s.b)));
    let mut prev_actions: Mask = 0;
    let mut union: Mask = 0;
    for (i, s) in trace.steps.iter().enumerate() {
        if i > 0 && (prev_states & !s.states != 0 || s.states == prev_states) {
            return bad(format!("state sets do not grow strictly at step {}", i + 1));
        }
        if trace.steps[..i].iter().any(|p| p.b == s.b) {
            return bad(format!("probe repeats at step {}", i + 1));
        }
        let (sub, _) = g.subgraph(s.states, s.accumulated)?;
        if !strategy::is_fully_controllable(&sub, budget)? {
            return bad(format!("step {} subgraph is not fully controllable", i + 1));
        }
        if s.expansive & !(s.kappa & !prev_actions & !bits::bit(s.b)) != 0 {
            return bad(format!("expansive set {} leaves its nonface", i + 1));
        }
        let lim = if i == 0 { 0 } else { 1 };
        if bits::len(g.src(s.expansive) & prev_states) > lim {
            return bad(format!("expansive set {} has too many sources inside", i + 1));
        }
        if union & s.expansive != 0 {
            return bad(format!("expansive set {} overlaps an earlier one", i + 1));
        }
        union |= s.expansive;
        prev_states = s.states;
        prev_actions = s.accumulated;
    }
    if bits::len(union) + 1 != bits::len(prev_states) {
        return bad("expansive sets do not cover the state set".into());
    }
    Ok(())
}

/// Release sequence of length `n - 1` inside a maximal strategy of a fully
/// controllable pure stochastic graph.
pub fn stochastic_iars(g: &Graph, sigma: Mask, budget: Budget) -> Result<StochasticRun> {
    let mut levels = Vec::new();
    let sequence = run_level(g, sigma, budget, &mut levels)?;
    Ok(StochasticRun { sequence, levels })
}

fn run_level(g: &Graph, sigma: Mask, budget: Budget, levels: &mut Vec<Level>) -> Result<Vec<usize>> {
    check_inputs(g, sigma, budget)?;
    let at = levels.len();
    levels.push(Level { graph: g.clone(), sigma, trace: None, sequence: Vec::new() });
    let seq = if g.n_states() == 2 {
        vec![first(sigma).ok_or_else(|| Error::InvariantViolation("empty maximal strategy".into()))?]
    } else {
        let trace = expansive_sets(g, &expand_min_nonfaces(g, sigma, budget)?)?;
        check_trace(g, &trace, budget)?;
        let mut seq = Vec::new();
        if trace.quotient.n_states() > 1 {
            let inner = run_level(&trace.quotient, trace.tau_prime, budget, levels)?;
            seq.extend(inner.into_iter().map(|a| trace.map.action_preimage[a]));
        }
        for s in trace.steps.iter().rev() {
            seq.extend(bits::iter(s.expansive));
        }
        levels[at].trace = Some(trace);
        seq
    };
    if seq.len() != g.n_states() - 1 || seq.iter().any(|&a| !bits::has(sigma, a)) {
        return Err(Error::InvariantViolation(format!(
            "sequence of length {} for {} states",
            seq.len(),
            g.n_states()
        )));
    }
    let check = strategy::action_relation(g, budget)?.is_iars(&seq)?;
    if !check.valid {
        return Err(Error::InvariantViolation(format!(
            "constructed sequence fails at position {}",
            check.first_failure.unwrap_or(0)
        )));
    }
    levels[at].sequence = seq.clone();
    Ok(seq)
}

impl ExpansionTrace {
    pub fn to_json(&self, g: &Graph) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                json!({
                    "b": g.action(s.b).id,
                    "kappa": g.action_ids(s.kappa),
                    "accumulated": g.action_ids(s.accumulated),
                    "states": g.state_ids(s.states),
                    "xi": g.action_ids(s.xi),
                    "tau": g.action_ids(s.tau),
                    "expansive": g.action_ids(s.expansive),
                })
            })
            .collect();
        json!({
            "goal": g.states()[self.goal],
            "k": self.steps.len(),
            "steps": steps,
            "tau_prime": self.quotient.action_ids(self.tau_prime),
        })
    }
}

impl StochasticRun {
    pub fn to_json(&self) -> Value {
        let levels: Vec<Value> = self
            .levels
            .iter()
            .map(|l| {
                json!({
                    "states": l.graph.states(),
                    "sigma": l.graph.action_ids(l.sigma),
                    "sequence": l.sequence.iter().map(|&a| l.graph.action(a).id.clone()).collect::<Vec<_>>(),
                    "trace": l.trace.as_ref().map(|t| t.to_json(&l.graph)),
                })
            })
            .collect();
        let g = &self.levels[0].graph;
        json!({
            "sequence": self.sequence.iter().map(|&a| g.action(a).id.clone()).collect::<Vec<_>>(),
            "levels": levels,
        })
    }
}
