use thiserror::Error;

/// What went wrong while reading a graph or hcg document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("duplicate state id")]
    DuplicateState,
    #[error("duplicate action id")]
    DuplicateAction,
    #[error("weights sum ≠ 1")]
    WeightSum,
    #[error("target outside state set")]
    UnknownTarget,
    #[error("source outside state set")]
    UnknownSource,
    #[error("empty target set")]
    EmptyTargets,
    #[error("deterministic action with several targets")]
    DeterministicFanout,
    #[error("invalid weight")]
    BadWeight,
    #[error("syntax error: {0}")]
    Syntax(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {kind} (at `{token}`)")]
    Parse {
        line: usize,
        token: String,
        kind: ParseErrorKind,
    },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
    #[error("duplicate element `{0}`")]
    Duplicate(String),
    #[error("{what} exceeds the limit of {limit}")]
    TooLarge { what: &'static str, limit: usize },
    #[error("enumeration budget of {limit} nodes exceeded in {what}")]
    Budget { what: &'static str, limit: usize },
    #[error("invalid quotient blocks: {0}")]
    Blocks(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("relation format: {0}")]
    Relation(String),
    #[error("hcg format: line {line}: {msg}")]
    HcgFormat { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
