//! Loading graphs, relations and hcgs from files or the bundled fixtures.
//!
//! A `fixture:<id>` argument names a bundled fixture; anything else is a
//! path. For hcgs, `fixture:<graph>/<name>` picks one of several.

use iars_core::{fixtures, parse_graph, Graph, Hcg, Relation};

use crate::error::{CliError, CliResult};

pub const FIXTURE_PREFIX: &str = "fixture:";

/// What an input argument resolved to.
pub enum Source {
    Graph(Graph),
    Relation(Relation),
}

fn read(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_string(), source })
}

/// Graph fixtures and `.graph`-style files become graphs; relation fixtures
/// and `.csv` files become relations.
pub fn load(arg: &str) -> CliResult<Source> {
    if let Some(id) = arg.strip_prefix(FIXTURE_PREFIX) {
        if fixtures::GRAPHS.iter().any(|f| f.id == id) {
            return Ok(Source::Graph(fixtures::graph(id)?));
        }
        return Ok(Source::Relation(fixtures::relation(id)?));
    }
    let text = read(arg)?;
    if arg.ends_with(".csv") {
        Ok(Source::Relation(Relation::from_csv(&text)?))
    } else {
        Ok(Source::Graph(parse_graph(&text)?))
    }
}

pub fn load_graph(arg: &str) -> CliResult<Graph> {
    match load(arg)? {
        Source::Graph(g) => Ok(g),
        Source::Relation(_) => Err(CliError::Input(format!("{arg} is a relation, a graph is required"))),
    }
}

pub fn load_hcg(arg: &str) -> CliResult<Hcg> {
    if let Some(rest) = arg.strip_prefix(FIXTURE_PREFIX) {
        let (id, name) = match rest.split_once('/') {
            Some((id, name)) => (id, Some(name)),
            None => (rest, None),
        };
        return Ok(fixtures::hcg(id, name)?);
    }
    Ok(Hcg::parse(&read(arg)?)?)
}

/// Splits `a,b c` into ids.
pub fn id_list(s: &str) -> Vec<String> {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|x| !x.is_empty()).map(str::to_string).collect()
}
