//! States, errorful actions, circuits and quotient graphs.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::{CheckedAdd, One, Zero};
use serde::Serialize;

use crate::bits::{self, Mask, MAX_ELEMS};
use crate::error::{Error, ParseErrorKind, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Deterministic,
    Nondeterministic,
    Stochastic,
}

impl Kind {
    pub fn keyword(self) -> &'static str {
        match self {
            Kind::Deterministic => "det",
            Kind::Nondeterministic => "nondet",
            Kind::Stochastic => "stoch",
        }
    }

    fn from_keyword(s: &str) -> Option<Kind> {
        match s {
            "det" | "deterministic" => Some(Kind::Deterministic),
            "nondet" | "nondeterministic" => Some(Kind::Nondeterministic),
            "stoch" | "stochastic" => Some(Kind::Stochastic),
            _ => None,
        }
    }
}

/// An action `source -> targets`. Targets are state indices in ascending
/// order; `weights` runs parallel to them for stochastic actions only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub id: String,
    pub kind: Kind,
    pub source: usize,
    pub targets: Vec<usize>,
    pub weights: Vec<Rational64>,
}

/// Which action kinds occur. Deterministic actions belong to both pure kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Purity {
    Deterministic,
    PureNondeterministic,
    PureStochastic,
    Mixed,
}

impl Purity {
    pub fn is_pure_nondeterministic(self) -> bool {
        matches!(self, Purity::Deterministic | Purity::PureNondeterministic)
    }

    pub fn is_pure_stochastic(self) -> bool {
        matches!(self, Purity::Deterministic | Purity::PureStochastic)
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    states: Vec<String>,
    actions: Vec<Action>,
    state_ix: HashMap<String, usize>,
    action_ix: HashMap<String, usize>,
    target_masks: Vec<Mask>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states && self.actions == other.actions
    }
}

/// Correspondence between a graph and one of its quotients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientMap {
    /// old state index -> new state index
    pub state_image: Vec<usize>,
    /// block -> new state index
    pub block_reps: Vec<usize>,
    /// old action index -> new action index, `None` when dropped as a self-loop
    pub action_image: Vec<Option<usize>>,
    /// new action index -> old action index
    pub action_preimage: Vec<usize>,
}

impl QuotientMap {
    /// Old action set corresponding to a set of quotient actions.
    pub fn lift(&self, m: Mask) -> Mask {
        bits::iter(m).fold(0, |acc, a| acc | bits::bit(self.action_preimage[a]))
    }

    /// Quotient actions corresponding to the surviving members of `m`.
    pub fn project(&self, m: Mask) -> Mask {
        bits::iter(m)
            .filter_map(|a| self.action_image[a])
            .fold(0, |acc, a| acc | bits::bit(a))
    }

    pub fn project_states(&self, m: Mask) -> Mask {
        bits::iter(m).fold(0, |acc, s| acc | bits::bit(self.state_image[s]))
    }

    /// Old states mapped into the given quotient states.
    pub fn lift_states(&self, m: Mask) -> Mask {
        self.state_image
            .iter()
            .enumerate()
            .filter(|(_, &t)| bits::has(m, t))
            .fold(0, |acc, (s, _)| acc | bits::bit(s))
    }
}

impl Graph {
    /// Builds a graph, checking every structural invariant.
    pub fn new(states: Vec<String>, actions: Vec<Action>) -> Result<Graph> {
        if states.is_empty() {
            return Err(Error::Precondition("a graph needs at least one state".into()));
        }
        if states.len() > MAX_ELEMS {
            return Err(Error::TooLarge { what: "state count", limit: MAX_ELEMS });
        }
        if actions.len() > MAX_ELEMS {
            return Err(Error::TooLarge { what: "action count", limit: MAX_ELEMS });
        }
        let mut state_ix = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if state_ix.insert(s.clone(), i).is_some() {
                return Err(Error::Duplicate(s.clone()));
            }
        }
        let n = states.len();
        let mut action_ix = HashMap::new();
        let mut target_masks = Vec::with_capacity(actions.len());
        for (i, a) in actions.iter().enumerate() {
            if action_ix.insert(a.id.clone(), i).is_some() {
                return Err(Error::Duplicate(a.id.clone()));
            }
            if a.source >= n {
                return Err(Error::UnknownState(format!("#{}", a.source)));
            }
            if a.targets.is_empty() {
                return Err(Error::Precondition(format!("action {} has no targets", a.id)));
            }
            if a.targets.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Precondition(format!(
                    "targets of {} must be strictly ascending",
                    a.id
                )));
            }
            if let Some(&t) = a.targets.iter().find(|&&t| t >= n) {
                return Err(Error::UnknownState(format!("#{t}")));
            }
            if a.kind == Kind::Deterministic && a.targets.len() != 1 {
                return Err(Error::Precondition(format!(
                    "deterministic action {} needs exactly one target",
                    a.id
                )));
            }
            if a.kind == Kind::Stochastic {
                check_weights(&a.weights, a.targets.len())
                    .map_err(|k| Error::Precondition(format!("action {}: {k}", a.id)))?;
            } else if !a.weights.is_empty() {
                return Err(Error::Precondition(format!("action {} is not stochastic", a.id)));
            }
            target_masks.push(bits::from_indices(a.targets.iter().copied()));
        }
        Ok(Graph { states, actions, state_ix, action_ix, target_masks })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn action(&self, a: usize) -> &Action {
        &self.actions[a]
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.state_ix.get(id).copied()
    }

    pub fn action_index(&self, id: &str) -> Option<usize> {
        self.action_ix.get(id).copied()
    }

    pub fn all_states(&self) -> Mask {
        bits::full(self.states.len())
    }

    pub fn all_actions(&self) -> Mask {
        bits::full(self.actions.len())
    }

    pub fn source(&self, a: usize) -> usize {
        self.actions[a].source
    }

    pub fn targets(&self, a: usize) -> Mask {
        self.target_masks[a]
    }

    /// Source states of an action set.
    pub fn src(&self, m: Mask) -> Mask {
        bits::iter(m).fold(0, |acc, a| acc | bits::bit(self.actions[a].source))
    }

    pub fn state_mask<S: AsRef<str>>(&self, ids: &[S]) -> Result<Mask> {
        ids.iter().try_fold(0, |acc, id| {
            let id = id.as_ref();
            self.state_index(id)
                .map(|i| acc | bits::bit(i))
                .ok_or_else(|| Error::UnknownState(id.to_string()))
        })
    }

    pub fn action_mask<S: AsRef<str>>(&self, ids: &[S]) -> Result<Mask> {
        ids.iter().try_fold(0, |acc, id| {
            let id = id.as_ref();
            self.action_index(id)
                .map(|i| acc | bits::bit(i))
                .ok_or_else(|| Error::UnknownAction(id.to_string()))
        })
    }

    pub fn action_ids(&self, m: Mask) -> Vec<String> {
        bits::iter(m).map(|a| self.actions[a].id.clone()).collect()
    }

    pub fn state_ids(&self, m: Mask) -> Vec<String> {
        bits::iter(m).map(|s| self.states[s].clone()).collect()
    }

    pub fn purity(&self) -> Purity {
        let nondet = self.actions.iter().any(|a| a.kind == Kind::Nondeterministic);
        let stoch = self.actions.iter().any(|a| a.kind == Kind::Stochastic);
        match (nondet, stoch) {
            (false, false) => Purity::Deterministic,
            (true, false) => Purity::PureNondeterministic,
            (false, true) => Purity::PureStochastic,
            (true, true) => Purity::Mixed,
        }
    }

    /// Whether action `a` moves off the state set `w`.
    pub fn moves_off(&self, a: usize, w: Mask) -> bool {
        let act = &self.actions[a];
        if !bits::has(w, act.source) {
            return false;
        }
        let t = self.target_masks[a];
        match act.kind {
            Kind::Stochastic => t & !w != 0,
            _ => t & w == 0,
        }
    }

    /// Whether any nonempty subset of `m` fails to move off its own sources.
    pub fn contains_circuit(&self, m: Mask) -> bool {
        let mut rest = m;
        loop {
            let s = self.src(rest);
            let leaving = bits::iter(rest)
                .filter(|&a| self.moves_off(a, s))
                .fold(0, |acc, a| acc | bits::bit(a));
            if leaving == 0 {
                return rest != 0;
            }
            rest &= !leaving;
        }
    }

    pub fn is_convergent(&self, m: Mask) -> bool {
        !self.contains_circuit(m)
    }

    /// Actions within `m` whose source and targets all lie in `w`.
    pub fn actions_within(&self, w: Mask, m: Mask) -> Mask {
        bits::iter(m)
            .filter(|&a| bits::has(w, self.actions[a].source) && self.target_masks[a] & !w == 0)
            .fold(0, |acc, a| acc | bits::bit(a))
    }

    /// The graph `(w, m)`; every action of `m` must stay inside `w`.
    pub fn subgraph(&self, w: Mask, m: Mask) -> Result<(Graph, Vec<usize>)> {
        if self.actions_within(w, m) != m {
            return Err(Error::Precondition("subgraph actions leave the state set".into()));
        }
        let old_states: Vec<usize> = bits::iter(w).collect();
        let mut image = vec![usize::MAX; self.states.len()];
        for (new, &old) in old_states.iter().enumerate() {
            image[old] = new;
        }
        let states = old_states.iter().map(|&s| self.states[s].clone()).collect();
        let kept: Vec<usize> = bits::iter(m).collect();
        let actions = kept
            .iter()
            .map(|&a| {
                let act = &self.actions[a];
                Action {
                    id: act.id.clone(),
                    kind: act.kind,
                    source: image[act.source],
                    targets: act.targets.iter().map(|&t| image[t]).collect(),
                    weights: act.weights.clone(),
                }
            })
            .collect();
        Ok((Graph::new(states, actions)?, kept))
    }

    /// Collapses each block to a fresh state. With `drop_self_loops`, actions
    /// that become `q -> {q}` are removed.
    pub fn quotient(&self, blocks: &[Mask], drop_self_loops: bool) -> Result<(Graph, QuotientMap)> {
        let all = self.all_states();
        let mut seen: Mask = 0;
        for &b in blocks {
            if b == 0 {
                return Err(Error::Blocks("empty block".into()));
            }
            if b & !all != 0 {
                return Err(Error::Blocks("block outside the state set".into()));
            }
            if b & seen != 0 {
                return Err(Error::Blocks("overlapping blocks".into()));
            }
            seen |= b;
        }
        let block_of = |s: usize| blocks.iter().position(|&b| bits::has(b, s));

        let mut names: Vec<String> = Vec::new();
        let mut state_image = vec![0; self.states.len()];
        let mut block_reps = vec![usize::MAX; blocks.len()];
        for s in 0..self.states.len() {
            match block_of(s) {
                Some(b) if block_reps[b] != usize::MAX => state_image[s] = block_reps[b],
                Some(b) => {
                    let mut name = format!("q{}", b + 1);
                    while self.state_ix.contains_key(&name) || names.contains(&name) {
                        name.push('\'');
                    }
                    block_reps[b] = names.len();
                    state_image[s] = names.len();
                    names.push(name);
                }
                None => {
                    state_image[s] = names.len();
                    names.push(self.states[s].clone());
                }
            }
        }

        let mut actions = Vec::new();
        let mut action_image = vec![None; self.actions.len()];
        let mut action_preimage = Vec::new();
        for (i, act) in self.actions.iter().enumerate() {
            let source = state_image[act.source];
            let mut merged: Vec<(usize, Rational64)> = Vec::new();
            for (k, &t) in act.targets.iter().enumerate() {
                let nt = state_image[t];
                let w = act.weights.get(k).copied().unwrap_or_else(Rational64::zero);
                match merged.iter_mut().find(|(x, _)| *x == nt) {
                    Some((_, acc)) => *acc += w,
                    None => merged.push((nt, w)),
                }
            }
            merged.sort_by_key(|&(t, _)| t);
            if drop_self_loops && merged.len() == 1 && merged[0].0 == source {
                continue;
            }
            let weights = if act.kind == Kind::Stochastic {
                merged.iter().map(|&(_, w)| w).collect()
            } else {
                Vec::new()
            };
            action_image[i] = Some(actions.len());
            action_preimage.push(i);
            actions.push(Action {
                id: act.id.clone(),
                kind: act.kind,
                source,
                targets: merged.iter().map(|&(t, _)| t).collect(),
                weights,
            });
        }
        let g = Graph::new(names, actions)?;
        Ok((g, QuotientMap { state_image, block_reps, action_image, action_preimage }))
    }

    /// Normalized text form; parsing it yields an equal graph.
    pub fn to_text(&self) -> String {
        let mut out = String::from("states:");
        for s in &self.states {
            out.push(' ');
            out.push_str(s);
        }
        out.push('\n');
        for a in &self.actions {
            let _ = write!(out, "action {} {} {} -> ", a.id, a.kind.keyword(), self.states[a.source]);
            match a.kind {
                Kind::Deterministic => out.push_str(&self.states[a.targets[0]]),
                Kind::Nondeterministic => {
                    let ts: Vec<&str> = a.targets.iter().map(|&t| self.states[t].as_str()).collect();
                    let _ = write!(out, "{{ {} }}", ts.join(", "));
                }
                Kind::Stochastic => {
                    let ts: Vec<String> = a
                        .targets
                        .iter()
                        .zip(&a.weights)
                        .map(|(&t, w)| format!("{}: {}", self.states[t], w))
                        .collect();
                    let _ = write!(out, "{{ {} }}", ts.join(", "));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn check_weights(ws: &[Rational64], n: usize) -> std::result::Result<(), ParseErrorKind> {
    if ws.len() != n || ws.iter().any(|w| *w <= Rational64::zero()) {
        return Err(ParseErrorKind::BadWeight);
    }
    let mut sum = Rational64::zero();
    for w in ws {
        sum = sum.checked_add(w).ok_or(ParseErrorKind::BadWeight)?;
    }
    if sum != Rational64::one() {
        return Err(ParseErrorKind::WeightSum);
    }
    Ok(())
}

fn perr(line: usize, token: &str, kind: ParseErrorKind) -> Error {
    Error::Parse { line, token: token.to_string(), kind }
}

fn parse_weight(line: usize, tok: &str) -> Result<Rational64> {
    let bad = || perr(line, tok, ParseErrorKind::BadWeight);
    let (p, q) = match tok.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (tok, "1"),
    };
    let p: i64 = p.parse().map_err(|_| bad())?;
    let q: i64 = q.parse().map_err(|_| bad())?;
    if p <= 0 || q <= 0 {
        return Err(bad());
    }
    Ok(Rational64::new(p, q))
}

/// Reads the line-oriented graph format.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut states: Vec<String> = Vec::new();
    let mut state_ix: HashMap<String, usize> = HashMap::new();
    let mut actions: Vec<Action> = Vec::new();
    let mut action_ids: HashMap<String, usize> = HashMap::new();
    let mut last_line = 0;

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        last_line = line;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("states:") {
            for tok in rest.split_whitespace() {
                if state_ix.contains_key(tok) {
                    return Err(perr(line, tok, ParseErrorKind::DuplicateState));
                }
                state_ix.insert(tok.to_string(), states.len());
                states.push(tok.to_string());
            }
            continue;
        }
        let Some(rest) = body.strip_prefix("action") else {
            let tok = body.split_whitespace().next().unwrap_or("");
            return Err(perr(line, tok, ParseErrorKind::Syntax("expected `states:` or `action`".into())));
        };
        let Some((lhs, rhs)) = rest.split_once("->") else {
            return Err(perr(line, body, ParseErrorKind::Syntax("missing `->`".into())));
        };
        let head: Vec<&str> = lhs.split_whitespace().collect();
        if head.len() != 3 {
            return Err(perr(line, lhs.trim(), ParseErrorKind::Syntax("expected `action <id> <kind> <source>`".into())));
        }
        let (id, kind_tok, src_tok) = (head[0], head[1], head[2]);
        if action_ids.contains_key(id) {
            return Err(perr(line, id, ParseErrorKind::DuplicateAction));
        }
        let kind = Kind::from_keyword(kind_tok).ok_or_else(|| {
            perr(line, kind_tok, ParseErrorKind::Syntax("kind must be det, nondet or stoch".into()))
        })?;
        let source = *state_ix
            .get(src_tok)
            .ok_or_else(|| perr(line, src_tok, ParseErrorKind::UnknownSource))?;

        let rhs = rhs.trim();
        let items: Vec<&str> = if let Some(inner) = rhs.strip_prefix('{') {
            let inner = inner
                .strip_suffix('}')
                .ok_or_else(|| perr(line, rhs, ParseErrorKind::Syntax("unclosed `{`".into())))?;
            inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
        } else if rhs.is_empty() {
            Vec::new()
        } else {
            vec![rhs]
        };
        if items.is_empty() {
            return Err(perr(line, rhs, ParseErrorKind::EmptyTargets));
        }
        let mut pairs: Vec<(usize, Rational64)> = Vec::new();
        for item in items {
            let (name, w) = match item.split_once(':') {
                Some((n, w)) if kind == Kind::Stochastic => (n.trim(), parse_weight(line, w.trim())?),
                Some(_) => {
                    return Err(perr(line, item, ParseErrorKind::Syntax("weights are only allowed on stoch actions".into())))
                }
                None if kind == Kind::Stochastic && !rhs.starts_with('{') => (item, Rational64::one()),
                None if kind == Kind::Stochastic => {
                    return Err(perr(line, item, ParseErrorKind::Syntax("missing weight".into())))
                }
                None => (item, Rational64::zero()),
            };
            if name.split_whitespace().count() != 1 {
                return Err(perr(line, name, ParseErrorKind::Syntax("malformed target".into())));
            }
            let t = *state_ix
                .get(name)
                .ok_or_else(|| perr(line, name, ParseErrorKind::UnknownTarget))?;
            if pairs.iter().any(|&(x, _)| x == t) {
                return Err(perr(line, name, ParseErrorKind::Syntax("repeated target".into())));
            }
            pairs.push((t, w));
        }
        if kind == Kind::Deterministic && pairs.len() != 1 {
            return Err(perr(line, rhs, ParseErrorKind::DeterministicFanout));
        }
        pairs.sort_by_key(|&(t, _)| t);
        let weights: Vec<Rational64> = if kind == Kind::Stochastic {
            pairs.iter().map(|&(_, w)| w).collect()
        } else {
            Vec::new()
        };
        if kind == Kind::Stochastic {
            check_weights(&weights, pairs.len()).map_err(|k| perr(line, rhs, k))?;
        }
        action_ids.insert(id.to_string(), actions.len());
        actions.push(Action {
            id: id.to_string(),
            kind,
            source,
            targets: pairs.iter().map(|&(t, _)| t).collect(),
            weights,
        });
    }
    if states.is_empty() {
        return Err(perr(last_line + 1, "", ParseErrorKind::Syntax("no states declared".into())));
    }
    Graph::new(states, actions)
}
