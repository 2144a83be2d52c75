//! Strategy complexes, Dowker relations and informative action release
//! sequences for nondeterministic and stochastic graphs.

pub mod bits;
pub mod brute;
pub mod dowker;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod hcg;
pub mod session;
pub mod stochastic;
pub mod strategy;

pub use bits::Mask;
pub use brute::{brute_force_longest_iars, count_full_iars, longest_iars, Longest, DEFAULT_NODE_LIMIT};
pub use dowker::{FaceReport, IarsCheck, Relation};
pub use error::{Error, ParseErrorKind, Result};
pub use graph::{parse_graph, Action, Graph, Kind, Purity, QuotientMap};
pub use hcg::{
    acyclic_dissection, classify_tau, extract_hcg, forward_projection, nondet_iars, order_cycle_breaking,
    validate_hcg, AcyclicDissection, Classification, Diagnostic, Hcg, HcgReport, NondetRun,
};
pub use session::{RevealSession, SessionView};
pub use stochastic::{
    check_trace, expand_min_nonfaces, expansive_sets, stochastic_iars, ExpansionStep, ExpansionTrace, Level,
    StochasticRun,
};
pub use strategy::{
    action_relation, goal_set, is_fully_controllable, is_maximal, is_minimal_nonface, maximal_strategies,
    minimal_nonfaces, row_key, shrink_to_minimal_nonface, smallest_maximal_extension, Budget,
};
