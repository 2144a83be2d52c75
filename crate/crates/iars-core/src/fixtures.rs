//! Bundled example graphs, hcgs and relations.

use crate::dowker::Relation;
use crate::error::{Error, Result};
use crate::graph::{parse_graph, Graph};
use crate::hcg::Hcg;

pub struct GraphFixture {
    pub id: &'static str,
    pub text: &'static str,
    /// expected action relation: `strategy,<actions>,goal`
    pub expected: &'static str,
    /// `(name, text)` of the hcgs shipped with the graph
    pub hcgs: &'static [(&'static str, &'static str)],
}

pub struct RelationFixture {
    pub id: &'static str,
    pub csv: &'static str,
}

macro_rules! fx {
    ($f:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/", $f))
    };
}

pub const GRAPHS: &[GraphFixture] = &[
    GraphFixture { id: "cycle4", text: fx!("cycle4.graph"), expected: fx!("cycle4.expected.csv"), hcgs: &[] },
    GraphFixture { id: "crossed_square", text: fx!("crossed_square.graph"), expected: fx!("crossed_square.expected.csv"), hcgs: &[] },
    GraphFixture {
        id: "triangle_hub",
        text: fx!("triangle_hub.graph"),
        expected: fx!("triangle_hub.expected.csv"),
        hcgs: &[("default", fx!("triangle_hub.hcg"))],
    },
    GraphFixture {
        id: "triangle_fan",
        text: fx!("triangle_fan.graph"),
        expected: fx!("triangle_fan.expected.csv"),
        hcgs: &[("default", fx!("triangle_fan.hcg"))],
    },
    GraphFixture {
        id: "twin_triangles",
        text: fx!("twin_triangles.graph"),
        expected: fx!("twin_triangles.expected.csv"),
        hcgs: &[("nested", fx!("twin_triangles_nested.hcg")), ("flat", fx!("twin_triangles_flat.hcg"))],
    },
    GraphFixture {
        id: "det_spur",
        text: fx!("det_spur.graph"),
        expected: fx!("det_spur.expected.csv"),
        hcgs: &[("default", fx!("det_spur.hcg"))],
    },
    GraphFixture { id: "stoch_triangle", text: fx!("stoch_triangle.graph"), expected: fx!("stoch_triangle.expected.csv"), hcgs: &[] },
    GraphFixture { id: "order_sensitive", text: fx!("order_sensitive.graph"), expected: fx!("order_sensitive.expected.csv"), hcgs: &[] },
    GraphFixture { id: "mixed_fan", text: fx!("mixed_fan.graph"), expected: fx!("mixed_fan.expected.csv"), hcgs: &[] },
    GraphFixture { id: "mixed_fan_sink", text: fx!("mixed_fan_sink.graph"), expected: fx!("mixed_fan_sink.expected.csv"), hcgs: &[] },
    GraphFixture { id: "mixed_fan4_sink", text: fx!("mixed_fan4_sink.graph"), expected: fx!("mixed_fan4_sink.expected.csv"), hcgs: &[] },
];

pub const RELATIONS: &[RelationFixture] = &[
    RelationFixture { id: "lake", csv: fx!("lake.csv") },
    RelationFixture { id: "stream", csv: fx!("stream.csv") },
    RelationFixture { id: "narrow", csv: fx!("narrow.csv") },
    RelationFixture { id: "narrow_hidden", csv: fx!("narrow_hidden.csv") },
    RelationFixture { id: "weak_motor", csv: fx!("weak_motor.csv") },
    RelationFixture { id: "triangle_hub_goals", csv: fx!("triangle_hub_goals.csv") },
];

pub fn graph_fixture(id: &str) -> Result<&'static GraphFixture> {
    GRAPHS
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::Precondition(format!("no graph fixture named {id}")))
}

pub fn graph(id: &str) -> Result<Graph> {
    parse_graph(graph_fixture(id)?.text)
}

/// The named hcg of a graph fixture; `None` picks the first one.
pub fn hcg(id: &str, name: Option<&str>) -> Result<Hcg> {
    let f = graph_fixture(id)?;
    let found = match name {
        Some(n) => f.hcgs.iter().find(|(k, _)| *k == n),
        None => f.hcgs.first(),
    };
    let (_, text) = found.ok_or_else(|| Error::Precondition(format!("no hcg {} for {id}", name.unwrap_or("default"))))?;
    Hcg::parse(text)
}

pub fn relation(id: &str) -> Result<Relation> {
    let f = RELATIONS
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::Precondition(format!("no relation fixture named {id}")))?;
    Relation::from_csv(f.csv)
}

/// One row of an expected action relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedRow {
    /// optional row label; may be blank
    pub label: Option<String>,
    pub actions: Vec<String>,
    pub goal: Vec<String>,
}

/// Rows of the expected action relation of a graph fixture. Action and
/// goal lists are sorted by id.
pub fn expected_rows(id: &str) -> Result<Vec<ExpectedRow>> {
    let text = graph_fixture(id)?.expected;
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let bad = |m: String| Error::Relation(format!("{id} expected table: {m}"));
    let header: Vec<String> = rd.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    if header.len() < 2 || header[0] != "strategy" || header[header.len() - 1] != "goal" {
        return Err(bad("header must be strategy,<actions>,goal".into()));
    }
    let cols = &header[1..header.len() - 1];
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let label = rec.get(0).filter(|l| !l.is_empty()).map(str::to_string);
        let mut actions: Vec<String> = cols
            .iter()
            .enumerate()
            .filter(|(i, _)| rec.get(i + 1) == Some("1"))
            .map(|(_, c)| c.clone())
            .collect();
        actions.sort();
        let mut goal: Vec<String> = rec.get(header.len() - 1).unwrap_or("").split_whitespace().map(str::to_string).collect();
        goal.sort();
        out.push(ExpectedRow { label, actions, goal });
    }
    Ok(out)
}
