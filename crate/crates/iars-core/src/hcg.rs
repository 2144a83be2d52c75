//! Hierarchical cyclic graphs and the release-sequence construction for pure
//! nondeterministic graphs.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bits::{self, Mask};
use crate::dowker::Relation;
use crate::error::{Error, Result};
use crate::graph::{Graph, Kind};
use crate::strategy::{self, Budget};

/// Tree decomposition: leaves carry one state, nodes an ordered list of
/// children and the cycle actions linking child `i` to child `i+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Hcg {
    Leaf { state: String, actions: Vec<String> },
    Node { cycle: Vec<String>, children: Vec<Hcg> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub clause: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HcgReport {
    pub valid: bool,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub cycle_breaking: bool,
    pub disruptive: bool,
}

/// Output of the marking-and-quotienting dissection of a strategy's trace
/// on an hcg. Node indices are preorder positions in the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcyclicDissection {
    pub tau: Mask,
    pub tau_o: Mask,
    pub tau_plus: Mask,
    pub tau_minus: Mask,
    pub xi: Mask,
    /// actions that are core cycle actions once marked nodes become leaves
    pub core: Mask,
    /// nodes in the order they were marked
    pub marked: Vec<usize>,
    pub h_star_is_leaf: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NondetRun {
    pub sequence: Vec<usize>,
    pub dissection: AcyclicDissection,
    /// for each released action after the cycle-breaking prefix: the
    /// missing core action it stands for and the nonface it came from
    pub witnesses: Vec<(usize, Mask)>,
}

impl Hcg {
    pub fn leaf(state: &str) -> Hcg {
        Hcg::Leaf { state: state.to_string(), actions: Vec::new() }
    }

    pub fn node<S: AsRef<str>>(cycle: &[S], children: Vec<Hcg>) -> Hcg {
        Hcg::Node { cycle: cycle.iter().map(|s| s.as_ref().to_string()).collect(), children }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Hcg::Leaf { .. })
    }

    pub fn leaf_states(&self) -> Vec<&str> {
        match self {
            Hcg::Leaf { state, .. } => vec![state.as_str()],
            Hcg::Node { children, .. } => children.iter().flat_map(Hcg::leaf_states).collect(),
        }
    }

    /// Cycle actions of every node, root first.
    pub fn actions(&self) -> Vec<&str> {
        match self {
            Hcg::Leaf { actions, .. } => actions.iter().map(String::as_str).collect(),
            Hcg::Node { cycle, children } => cycle
                .iter()
                .map(String::as_str)
                .chain(children.iter().flat_map(Hcg::actions))
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(0, &mut out);
        out
    }

    fn write_text(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match self {
            Hcg::Leaf { state, actions } if actions.is_empty() => {
                let _ = writeln!(out, "{pad}leaf {state}");
            }
            Hcg::Leaf { state, actions } => {
                let _ = writeln!(out, "{pad}leaf {state} actions=[{}]", actions.join(","));
            }
            Hcg::Node { cycle, children } => {
                let _ = writeln!(out, "{pad}node cycle=[{}]", cycle.join(","));
                for c in children {
                    c.write_text(depth + 1, out);
                }
            }
        }
    }

    /// Reads the indented tree format written by [`Hcg::to_text`].
    pub fn parse(text: &str) -> Result<Hcg> {
        let mut items = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("").trim_end();
            if body.trim().is_empty() {
                continue;
            }
            let indent = body.len() - body.trim_start().len();
            if indent % 2 != 0 || body[..indent].contains('\t') {
                return Err(Error::HcgFormat { line, msg: "indent by two spaces per level".into() });
            }
            items.push((line, indent / 2, parse_item(line, body.trim())?));
        }
        let Some(&(line, depth, _)) = items.first() else {
            return Err(Error::HcgFormat { line: 0, msg: "empty document".into() });
        };
        if depth != 0 {
            return Err(Error::HcgFormat { line, msg: "the root must not be indented".into() });
        }
        let (tree, next) = build(&items, 0)?;
        if let Some(&(line, _, _)) = items.get(next) {
            return Err(Error::HcgFormat { line, msg: "more than one root".into() });
        }
        Ok(tree)
    }
}

enum Item {
    Leaf(String, Vec<String>),
    Node(Vec<String>),
}

fn bracket_list(line: usize, s: &str, key: &str) -> Result<Vec<String>> {
    let inner = s
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('['))
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::HcgFormat { line, msg: format!("expected {key}[...]") })?;
    Ok(inner.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::to_string).collect())
}

fn parse_item(line: usize, s: &str) -> Result<Item> {
    let mut parts = s.splitn(2, char::is_whitespace);
    let head = parts.next().unwrap_or("");
    let rest = parts.next().unwrap_or("").trim();
    match head {
        "node" => Ok(Item::Node(bracket_list(line, rest, "cycle=")?)),
        "leaf" => {
            let mut p = rest.splitn(2, char::is_whitespace);
            let state = p.next().unwrap_or("");
            if state.is_empty() {
                return Err(Error::HcgFormat { line, msg: "leaf needs a state".into() });
            }
            let extra = p.next().unwrap_or("").trim();
            let actions = if extra.is_empty() { Vec::new() } else { bracket_list(line, extra, "actions=")? };
            Ok(Item::Leaf(state.to_string(), actions))
        }
        _ => Err(Error::HcgFormat { line, msg: format!("expected `node` or `leaf`, found `{head}`") }),
    }
}

fn build(items: &[(usize, usize, Item)], at: usize) -> Result<(Hcg, usize)> {
    let (line, depth, item) = &items[at];
    match item {
        Item::Leaf(state, actions) => {
            if let Some(&(l, d, _)) = items.get(at + 1) {
                if d > *depth {
                    return Err(Error::HcgFormat { line: l, msg: "a leaf cannot have children".into() });
                }
            }
            Ok((Hcg::Leaf { state: state.clone(), actions: actions.clone() }, at + 1))
        }
        Item::Node(cycle) => {
            let mut children = Vec::new();
            let mut next = at + 1;
            while let Some(&(l, d, _)) = items.get(next) {
                if d <= *depth {
                    break;
                }
                if d != depth + 1 {
                    return Err(Error::HcgFormat { line: l, msg: "indentation skips a level".into() });
                }
                let (child, after) = build(items, next)?;
                children.push(child);
                next = after;
            }
            if children.is_empty() {
                return Err(Error::HcgFormat { line: *line, msg: "a node needs children".into() });
            }
            Ok((Hcg::Node { cycle: cycle.clone(), children }, next))
        }
    }
}

/// The tree bound to a host graph, flattened in preorder.
#[derive(Debug, Clone)]
pub(crate) struct Tree {
    pub nodes: Vec<TNode>,
}

#[derive(Debug, Clone)]
pub(crate) struct TNode {
    pub children: Vec<usize>,
    pub cycle: Vec<usize>,
    pub states: Mask,
    pub leaf: bool,
}

fn diag(out: &mut Vec<Diagnostic>, clause: &'static str, message: String) {
    out.push(Diagnostic { clause, message });
}

fn bind_rec(h: &Hcg, g: &Graph, nodes: &mut Vec<TNode>, seen: &mut Mask, d: &mut Vec<Diagnostic>) -> usize {
    let me = nodes.len();
    match h {
        Hcg::Leaf { state, actions } => {
            let s = match g.state_index(state) {
                Some(s) => bits::bit(s),
                None => {
                    diag(d, "host", format!("leaf state {state} is not a state of the graph"));
                    0
                }
            };
            if !actions.is_empty() {
                diag(d, "i", format!("leaf {state} carries actions [{}]", actions.join(",")));
            }
            nodes.push(TNode { children: Vec::new(), cycle: Vec::new(), states: s, leaf: true });
        }
        Hcg::Node { cycle, children } => {
            nodes.push(TNode { children: Vec::new(), cycle: Vec::new(), states: 0, leaf: false });
            let kids: Vec<usize> = children.iter().map(|c| bind_rec(c, g, nodes, seen, d)).collect();
            let mut states: Mask = 0;
            for &k in &kids {
                if states & nodes[k].states != 0 {
                    diag(d, "ii.a", format!("children of node [{}] share states", cycle.join(",")));
                }
                if nodes[k].states == 0 {
                    diag(d, "ii.a", format!("node [{}] has an empty child", cycle.join(",")));
                }
                states |= nodes[k].states;
            }
            if kids.len() < 2 {
                diag(d, "ii", format!("node [{}] needs at least two children", cycle.join(",")));
            }
            if cycle.len() != kids.len() {
                diag(d, "ii", format!("node [{}] has {} children but {} cycle actions", cycle.join(","), kids.len(), cycle.len()));
            }
            let mut ids = Vec::new();
            for (i, id) in cycle.iter().enumerate() {
                let Some(a) = g.action_index(id) else {
                    diag(d, "host", format!("cycle action {id} is not an action of the graph"));
                    continue;
                };
                if bits::has(*seen, a) {
                    diag(d, "ii.b", format!("action {id} appears more than once"));
                }
                *seen |= bits::bit(a);
                if g.action(a).kind == Kind::Stochastic {
                    diag(d, "host", format!("action {id} is stochastic"));
                }
                ids.push(a);
                if cycle.len() == kids.len() {
                    let from = nodes[kids[i]].states;
                    let to = nodes[kids[(i + 1) % kids.len()]].states;
                    if !bits::has(from, g.source(a)) {
                        diag(d, "ii.e", format!("source of {id} is not in child {}", i + 1));
                    }
                    if g.targets(a) & !to != 0 {
                        diag(d, "ii.e", format!("targets of {id} are not inside child {}", (i + 1) % kids.len() + 1));
                    }
                }
            }
            nodes[me] = TNode { children: kids, cycle: ids, states, leaf: false };
        }
    }
    me
}

fn analyze(h: &Hcg, g: &Graph) -> (Tree, Vec<Diagnostic>) {
    let mut nodes = Vec::new();
    let mut d = Vec::new();
    let mut seen = 0;
    bind_rec(h, g, &mut nodes, &mut seen, &mut d);
    let mut leaf_states: Mask = 0;
    for n in nodes.iter().filter(|n| n.leaf) {
        if leaf_states & n.states != 0 {
            diag(&mut d, "ii.a", format!("state {} appears in two leaves", g.state_ids(n.states).join(",")));
        }
        leaf_states |= n.states;
    }
    if nodes[0].states != g.all_states() {
        let missing = g.state_ids(g.all_states() & !nodes[0].states);
        diag(&mut d, "ii.a", format!("leaves do not cover states [{}]", missing.join(",")));
    }
    (Tree { nodes }, d)
}

/// Checks the definition of a hierarchical cyclic subgraph of `g`.
pub fn validate_hcg(h: &Hcg, g: &Graph) -> HcgReport {
    let (_, diagnostics) = analyze(h, g);
    HcgReport { valid: diagnostics.is_empty(), diagnostics }
}

impl Tree {
    pub(crate) fn bind(h: &Hcg, g: &Graph) -> Result<Tree> {
        let (tree, d) = analyze(h, g);
        if let Some(first) = d.first() {
            return Err(Error::Precondition(format!("invalid hcg ({}): {}", first.clause, first.message)));
        }
        Ok(tree)
    }

    pub(crate) fn actions(&self) -> Mask {
        self.nodes.iter().flat_map(|n| n.cycle.iter()).fold(0, |m, &a| m | bits::bit(a))
    }

    fn cycle_mask(&self, i: usize) -> Mask {
        bits::from_indices(self.nodes[i].cycle.iter().copied())
    }

    fn subtree_actions(&self, i: usize) -> Mask {
        self.nodes[i].children.iter().fold(self.cycle_mask(i), |m, &c| m | self.subtree_actions(c))
    }

    fn internal(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| !self.nodes[i].leaf)
    }

    /// Whether every child of `i` is a leaf once the nodes in `marked` are
    /// viewed as leaves.
    fn covers_only_leaves(&self, i: usize, marked: &[bool]) -> bool {
        self.nodes[i].children.iter().all(|&c| self.nodes[c].leaf || marked[c])
    }

    fn check_subset(&self, g: &Graph, tau: Mask) -> Result<()> {
        match bits::iter(tau & !self.actions()).next() {
            Some(a) => Err(Error::UnknownAction(format!("{} is not an hcg action", g.action(a).id))),
            None => Ok(()),
        }
    }
}

/// Cycle-breaking: no node has all its cycle actions in `tau`. Disruptive:
/// every node covering only leaves misses at least two of them.
pub fn classify_tau(g: &Graph, h: &Hcg, tau: Mask) -> Result<Classification> {
    let tree = Tree::bind(h, g)?;
    tree.check_subset(g, tau)?;
    let none = vec![false; tree.nodes.len()];
    Ok(classify(&tree, tau, &none))
}

fn classify(tree: &Tree, tau: Mask, marked: &[bool]) -> Classification {
    let live = || tree.internal().filter(|&i| !marked[i]);
    let cycle_breaking = live().all(|i| tree.cycle_mask(i) & !tau != 0);
    let disruptive = live()
        .filter(|&i| tree.covers_only_leaves(i, marked))
        .all(|i| bits::len(tree.cycle_mask(i) & !tau) >= 2);
    Classification { cycle_breaking, disruptive }
}

/// Orders a cycle-breaking set: each node's own actions (canonical order)
/// before those of its children, children left to right.
pub fn order_cycle_breaking(g: &Graph, h: &Hcg, tau: Mask) -> Result<Vec<usize>> {
    let tree = Tree::bind(h, g)?;
    tree.check_subset(g, tau)?;
    if tau == 0 {
        return Err(Error::Precondition("the set must be nonempty".into()));
    }
    if !classify(&tree, tau, &vec![false; tree.nodes.len()]).cycle_breaking {
        return Err(Error::Precondition("the set is not cycle-breaking".into()));
    }
    Ok(release_order(&tree, tau))
}

fn release_order(tree: &Tree, tau: Mask) -> Vec<usize> {
    fn walk(tree: &Tree, i: usize, tau: Mask, out: &mut Vec<usize>) {
        out.extend(bits::iter(tree.cycle_mask(i) & tau));
        for &c in &tree.nodes[i].children {
            walk(tree, c, tau, out);
        }
    }
    let mut out = Vec::new();
    walk(tree, 0, tau, &mut out);
    out
}

/// States reachable from `w` along actions of the convergent set `sigma`,
/// including `w` itself.
pub fn forward_projection(g: &Graph, w: Mask, sigma: Mask) -> Result<Mask> {
    if w == 0 {
        return Err(Error::Precondition("the start set must be nonempty".into()));
    }
    if w & !g.all_states() != 0 {
        return Err(Error::UnknownState("outside the graph".into()));
    }
    if g.contains_circuit(sigma) {
        return Err(Error::Precondition("forward projections need a convergent set".into()));
    }
    Ok(reach(g, w, sigma))
}

fn reach(g: &Graph, w: Mask, sigma: Mask) -> Mask {
    let mut seen = w;
    loop {
        let next = bits::iter(sigma)
            .filter(|&a| bits::has(seen, g.source(a)))
            .fold(seen, |m, a| m | g.targets(a));
        if next == seen {
            return seen;
        }
        seen = next;
    }
}

/// Marks nodes until the remaining trace of `tau` is disruptive, then splits
/// it into the four dissection sets.
pub fn acyclic_dissection(g: &Graph, h: &Hcg, tau: Mask) -> Result<AcyclicDissection> {
    let tree = Tree::bind(h, g)?;
    tree.check_subset(g, tau)?;
    let d = dissect(&tree, tau)?;
    check_dissection(g, &tree, &d)?;
    Ok(d)
}

fn dissect(tree: &Tree, tau: Mask) -> Result<AcyclicDissection> {
    let n = tree.nodes.len();
    let mut marked = vec![false; n];
    let mut order = Vec::new();
    let mut tau_o: Mask = 0;
    while !classify(tree, tau, &marked).disruptive {
        let pick = tree.internal().find(|&i| {
            !marked[i] && tree.covers_only_leaves(i, &marked) && bits::len(tree.cycle_mask(i) & !tau) <= 1
        });
        let Some(i) = pick else {
            return Err(Error::InvariantViolation("no node can be marked although the trace is not disruptive".into()));
        };
        let cyc = tree.cycle_mask(i);
        let missing = cyc & !tau;
        let discard = if missing != 0 { missing } else { bits::bit(127 - cyc.leading_zeros() as usize) };
        tau_o |= cyc & !discard;
        marked[i] = true;
        order.push(i);
    }

    let mut core: Mask = 0;
    for i in tree.internal().filter(|&i| !marked[i]) {
        let node = &tree.nodes[i];
        let k = node.children.len();
        for (j, &a) in node.cycle.iter().enumerate() {
            let target = node.children[(j + 1) % k];
            if tree.nodes[target].leaf || marked[target] {
                core |= bits::bit(a);
            }
        }
    }

    let mut xi: Mask = 0;
    for i in tree.internal().filter(|&i| !marked[i]) {
        let cyc = tree.cycle_mask(i);
        if cyc & tau != cyc {
            xi |= cyc & tau;
        } else {
            let spare = cyc & !core;
            if spare == 0 {
                return Err(Error::InvariantViolation("a fully contained cycle has only core actions".into()));
            }
            let drop = bits::bit(127 - spare.leading_zeros() as usize);
            xi |= cyc & !drop;
        }
    }

    Ok(AcyclicDissection {
        tau,
        tau_o,
        tau_plus: core & xi,
        tau_minus: core & !xi,
        xi,
        core,
        marked: order,
        h_star_is_leaf: marked[0],
    })
}

fn violation(msg: &str) -> Error {
    Error::InvariantViolation(msg.to_string())
}

fn check_dissection(g: &Graph, tree: &Tree, d: &AcyclicDissection) -> Result<()> {
    let none = vec![false; tree.nodes.len()];
    if d.tau_plus & !d.xi != 0 {
        return Err(violation("tau_plus must lie in xi"));
    }
    if d.tau_minus & !tree.actions() != 0 {
        return Err(violation("tau_minus must consist of hcg actions"));
    }
    if (d.tau_o | d.xi) & !d.tau != 0 || d.tau_o & d.xi != 0 {
        return Err(violation("tau_o and xi must be disjoint parts of tau"));
    }
    if !classify(tree, d.tau_o | d.xi, &none).cycle_breaking {
        return Err(violation("tau_o ∪ xi must be cycle-breaking"));
    }
    if d.tau_minus & d.tau != 0 {
        return Err(violation("tau_minus must avoid tau"));
    }
    let n = g.n_states();
    let m = bits::len(d.tau_o | d.tau_plus | d.tau_minus);
    let want = if d.h_star_is_leaf { n - 1 } else { n };
    if m != want {
        return Err(Error::InvariantViolation(format!("dissection size {m}, expected {want}")));
    }
    // each maximal marked node u: |tau_o ∩ B_u| = |W_u| - 1
    let mut is_marked = vec![false; tree.nodes.len()];
    for &i in &d.marked {
        is_marked[i] = true;
    }
    for &i in &d.marked {
        let has_marked_parent = tree.internal().any(|p| is_marked[p] && tree.nodes[p].children.contains(&i));
        if !has_marked_parent {
            let inside = bits::len(d.tau_o & tree.subtree_actions(i));
            if inside + 1 != bits::len(tree.nodes[i].states) {
                return Err(violation("subgraph size law fails for a marked node"));
            }
        }
    }
    let eta = d.tau_o | d.tau_plus;
    if g.contains_circuit(eta) {
        return Err(violation("tau_o ∪ tau_plus must be convergent"));
    }
    let mut union: Mask = 0;
    for c in bits::iter(d.tau_minus) {
        let j = reach(g, g.targets(c), eta);
        if union & j != 0 {
            return Err(violation("forward projections of missing core actions overlap"));
        }
        if bits::has(j, g.source(c)) {
            return Err(violation("a forward projection contains its action's source"));
        }
        union |= j;
    }
    Ok(())
}

fn require_maximal(g: &Graph, sigma: Mask) -> Result<()> {
    if sigma & !g.all_actions() != 0 {
        return Err(Error::UnknownAction("outside the graph".into()));
    }
    if g.contains_circuit(sigma) || !strategy::is_maximal(g, sigma) {
        return Err(Error::Precondition("sigma must be a maximal strategy".into()));
    }
    Ok(())
}

fn require_controllable(rel: &Relation, g: &Graph) -> Result<()> {
    let goals = rel.goals().unwrap_or(&[]);
    let singletons: Vec<&String> = goals.iter().filter(|x| x.len() == 1).map(|x| &x[0]).collect();
    if g.states().iter().all(|s| singletons.contains(&s)) {
        Ok(())
    } else {
        Err(Error::Precondition("the graph is not fully controllable".into()))
    }
}

/// Release sequence inside a maximal strategy of a fully controllable pure
/// nondeterministic graph, built from a dissection over `h`.
pub fn nondet_iars(g: &Graph, h: &Hcg, sigma: Mask, budget: Budget) -> Result<NondetRun> {
    if !g.purity().is_pure_nondeterministic() {
        return Err(Error::Precondition("the graph must be pure nondeterministic".into()));
    }
    if g.n_states() < 2 {
        return Err(Error::Precondition("at least two states are required".into()));
    }
    require_maximal(g, sigma)?;
    let rel = strategy::action_relation(g, budget)?;
    require_controllable(&rel, g)?;
    let tree = Tree::bind(h, g)?;

    let tau = sigma & tree.actions();
    let d = dissect(&tree, tau)?;
    check_dissection(g, &tree, &d)?;

    let eta = d.tau_o | d.tau_plus;
    let mut seq = release_order(&tree, eta);
    let mut witnesses = Vec::new();
    for c in bits::iter(d.tau_minus) {
        let j = reach(g, g.targets(c), eta);
        let sigma_c = bits::iter(sigma)
            .filter(|&a| bits::has(j, g.source(a)) && g.targets(a) & !j != 0)
            .fold(0, |m, a| m | bits::bit(a));
        let known = rel.closure(bits::from_indices(seq.iter().copied()))?.0;
        let (b, kappa) = pick_release(g, sigma, c, sigma_c & !known).ok_or_else(|| {
            Error::InvariantViolation(format!("no informative action for missing core action {}", g.action(c).id))
        })?;
        seq.push(b);
        witnesses.push((c, kappa));
    }

    let check = rel.is_iars(&seq)?;
    if !check.valid {
        return Err(Error::InvariantViolation(format!(
            "constructed sequence fails at position {}",
            check.first_failure.unwrap_or(0)
        )));
    }
    let want = if d.h_star_is_leaf { g.n_states() - 1 } else { g.n_states() };
    if seq.len() < want {
        return Err(Error::InvariantViolation(format!("sequence length {} below {want}", seq.len())));
    }
    Ok(NondetRun { sequence: seq, dissection: d, witnesses })
}

/// First minimal nonface `κ ∋ c` inside `σ ∪ {c}` (size, then lexicographic)
/// that offers a candidate, and its first candidate.
fn pick_release(g: &Graph, sigma: Mask, c: usize, candidates: Mask) -> Option<(usize, Mask)> {
    let pool = sigma & !bits::bit(c);
    for k in 1..=bits::len(pool) {
        for rest in bits::combinations(pool, k) {
            let kappa = rest | bits::bit(c);
            if rest & candidates == 0 || !strategy::is_minimal_nonface(g, kappa) {
                continue;
            }
            let b = bits::iter(rest & candidates).next()?;
            return Some((b, kappa));
        }
    }
    None
}

/// Builds an hcg for a fully controllable pure nondeterministic graph by
/// backchaining single-target actions into a cycle, quotienting it away and
/// repeating.
pub fn extract_hcg(g: &Graph, budget: Budget) -> Result<Hcg> {
    if !g.purity().is_pure_nondeterministic() {
        return Err(Error::Precondition("the graph must be pure nondeterministic".into()));
    }
    if !strategy::is_fully_controllable(g, budget)? {
        return Err(Error::Precondition("the graph is not fully controllable".into()));
    }
    let mut cur = g.clone();
    let mut parts: Vec<(Hcg, usize)> = g.states().iter().enumerate().map(|(i, s)| (Hcg::leaf(s), i)).collect();
    while cur.n_states() > 1 {
        let (mut states, mut actions) = backchain(&cur)?;
        let k = (0..states.len()).min_by_key(|&i| parts[states[i]].1).unwrap_or(0);
        states.rotate_left(k);
        actions.rotate_left(k);
        let node = Hcg::Node {
            cycle: actions.iter().map(|&a| cur.action(a).id.clone()).collect(),
            children: states.iter().map(|&s| parts[s].0.clone()).collect(),
        };
        let least = states.iter().map(|&s| parts[s].1).min().unwrap_or(0);
        let block = bits::from_indices(states.iter().copied());
        let (q, map) = cur.quotient(&[block], true)?;
        let mut next: Vec<Option<(Hcg, usize)>> = vec![None; q.n_states()];
        next[map.block_reps[0]] = Some((node, least));
        for (old, part) in parts.into_iter().enumerate() {
            if !bits::has(block, old) {
                next[map.state_image[old]] = Some(part);
            }
        }
        parts = next.into_iter().map(|p| p.expect("every quotient state has a part")).collect();
        cur = q;
    }
    Ok(parts.swap_remove(0).0)
}

/// Follows single-target, non-looping actions backwards from the first state
/// until a state repeats; returns the cycle's states and actions in forward
/// order (child `i` is the source of action `i`).
fn backchain(g: &Graph) -> Result<(Vec<usize>, Vec<usize>)> {
    let into = |v: usize| {
        (0..g.n_actions()).find(|&a| {
            let act = g.action(a);
            act.targets.len() == 1 && act.targets[0] == v && act.source != v
        })
    };
    let mut chain = vec![0usize];
    let mut acts = Vec::new();
    loop {
        let v = *chain.last().expect("chain starts nonempty");
        let a = into(v).ok_or_else(|| {
            Error::Precondition(format!("no single-target action enters state {}", g.states()[v]))
        })?;
        let u = g.source(a);
        acts.push(a);
        if let Some(j) = chain.iter().position(|&s| s == u) {
            let m = chain.len();
            let mut states = vec![chain[j]];
            states.extend(chain[j + 1..m].iter().rev());
            let cycle: Vec<usize> = acts[j..m].iter().rev().copied().collect();
            return Ok((states, cycle));
        }
        chain.push(u);
    }
}

impl AcyclicDissection {
    pub fn to_json(&self, g: &Graph, h: &Hcg) -> serde_json::Value {
        let nodes = preorder_cycles(h);
        serde_json::json!({
            "tau": g.action_ids(self.tau),
            "tau_o": g.action_ids(self.tau_o),
            "tau_plus": g.action_ids(self.tau_plus),
            "tau_minus": g.action_ids(self.tau_minus),
            "xi": g.action_ids(self.xi),
            "core": g.action_ids(self.core),
            "marked": self.marked.iter().map(|&i| nodes.get(i).cloned().unwrap_or_default()).collect::<Vec<_>>(),
            "h_star": if self.h_star_is_leaf { "leaf" } else { "node" },
        })
    }
}

/// Cycle lists of every tree position in preorder (empty for leaves).
fn preorder_cycles(h: &Hcg) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    fn walk(h: &Hcg, out: &mut Vec<Vec<String>>) {
        match h {
            Hcg::Leaf { .. } => out.push(Vec::new()),
            Hcg::Node { cycle, children } => {
                out.push(cycle.clone());
                for c in children {
                    walk(c, out);
                }
            }
        }
    }
    walk(h, &mut out);
    out
}
