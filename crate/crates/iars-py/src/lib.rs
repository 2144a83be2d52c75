//! Python module `iars`. Graphs travel as text in the graph format,
//! relations as CSV, sets and sequences as lists of ids.

use iars_core::{fixtures, Budget, Graph, Hcg, Relation};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: iars_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn budget(max_actions: Option<usize>, max_nodes: Option<usize>) -> Budget {
    let d = Budget::default();
    Budget { max_actions: max_actions.unwrap_or(d.max_actions), max_nodes: max_nodes.unwrap_or(d.max_nodes) }
}

fn ids(g: &Graph, seq: &[usize]) -> Vec<String> {
    seq.iter().map(|&a| g.action(a).id.clone()).collect()
}

mod inner {
    use super::*;
    use iars_core::Result;

    pub fn maximal_strategies(text: &str, b: Budget) -> Result<Vec<Vec<String>>> {
        let g = iars_core::parse_graph(text)?;
        Ok(iars_core::maximal_strategies(&g, b)?.into_iter().map(|s| g.action_ids(s)).collect())
    }

    pub fn action_relation_csv(text: &str, b: Budget) -> Result<String> {
        Ok(iars_core::action_relation(&iars_core::parse_graph(text)?, b)?.to_csv())
    }

    pub fn is_iars(csv: &str, seq: &[String]) -> Result<bool> {
        Ok(Relation::from_csv(csv)?.is_iars_ids(seq)?.valid)
    }

    pub fn nondet_iars(text: &str, sigma: &[String], hcg: Option<&str>, b: Budget) -> Result<Vec<String>> {
        let g = iars_core::parse_graph(text)?;
        let h = match hcg {
            Some(t) => Hcg::parse(t)?,
            None => iars_core::extract_hcg(&g, b)?,
        };
        let run = iars_core::nondet_iars(&g, &h, g.action_mask(sigma)?, b)?;
        Ok(ids(&g, &run.sequence))
    }

    pub fn stochastic_iars(text: &str, sigma: &[String], b: Budget) -> Result<(Vec<String>, String)> {
        let g = iars_core::parse_graph(text)?;
        let run = iars_core::stochastic_iars(&g, g.action_mask(sigma)?, b)?;
        Ok((ids(&g, &run.sequence), run.to_json().to_string()))
    }

    pub fn longest_iars(csv: &str, within: Option<&[String]>, limit: usize) -> Result<(usize, Vec<String>)> {
        let rel = Relation::from_csv(csv)?;
        let m = match within {
            Some(w) => rel.attribute_mask(w)?,
            None => rel.all_attributes(),
        };
        let best = iars_core::longest_iars(&rel, m, limit)?;
        Ok((best.length, best.witness.iter().map(|&y| rel.attributes()[y].clone()).collect()))
    }
}

/// Canonical text of a parsed graph.
#[pyfunction]
fn parse_graph(text: &str) -> PyResult<String> {
    Ok(iars_core::parse_graph(text).map_err(py_err)?.to_text())
}

#[pyfunction]
#[pyo3(signature = (text, max_actions=None, max_nodes=None))]
fn maximal_strategies(text: &str, max_actions: Option<usize>, max_nodes: Option<usize>) -> PyResult<Vec<Vec<String>>> {
    inner::maximal_strategies(text, budget(max_actions, max_nodes)).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (text, max_actions=None, max_nodes=None))]
fn action_relation_csv(text: &str, max_actions: Option<usize>, max_nodes: Option<usize>) -> PyResult<String> {
    inner::action_relation_csv(text, budget(max_actions, max_nodes)).map_err(py_err)
}

#[pyfunction]
fn is_iars(csv: &str, seq: Vec<String>) -> PyResult<bool> {
    inner::is_iars(csv, &seq).map_err(py_err)
}

/// Sequence from the nondeterministic construction; extracts an hcg when
/// none is given.
#[pyfunction]
#[pyo3(signature = (text, sigma, hcg=None, max_actions=None, max_nodes=None))]
fn nondet_iars(
    text: &str,
    sigma: Vec<String>,
    hcg: Option<&str>,
    max_actions: Option<usize>,
    max_nodes: Option<usize>,
) -> PyResult<Vec<String>> {
    inner::nondet_iars(text, &sigma, hcg, budget(max_actions, max_nodes)).map_err(py_err)
}

/// Returns the sequence and the per-level trace as a JSON string.
#[pyfunction]
#[pyo3(signature = (text, sigma, max_actions=None, max_nodes=None))]
fn stochastic_iars(
    text: &str,
    sigma: Vec<String>,
    max_actions: Option<usize>,
    max_nodes: Option<usize>,
) -> PyResult<(Vec<String>, String)> {
    inner::stochastic_iars(text, &sigma, budget(max_actions, max_nodes)).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (csv, within=None, limit=iars_core::DEFAULT_NODE_LIMIT))]
fn longest_iars(csv: &str, within: Option<Vec<String>>, limit: usize) -> PyResult<(usize, Vec<String>)> {
    inner::longest_iars(csv, within.as_deref(), limit).map_err(py_err)
}

/// (graph ids, relation ids) of the bundled fixtures.
#[pyfunction]
fn fixture_ids() -> (Vec<&'static str>, Vec<&'static str>) {
    (fixtures::GRAPHS.iter().map(|f| f.id).collect(), fixtures::RELATIONS.iter().map(|f| f.id).collect())
}

#[pyfunction]
fn fixture_graph(id: &str) -> PyResult<String> {
    Ok(fixtures::graph_fixture(id).map_err(py_err)?.text.to_string())
}

#[pyfunction]
#[pyo3(signature = (id, name=None))]
fn fixture_hcg(id: &str, name: Option<&str>) -> PyResult<String> {
    Ok(fixtures::hcg(id, name).map_err(py_err)?.to_text())
}

#[pyfunction]
fn fixture_relation(id: &str) -> PyResult<String> {
    Ok(fixtures::relation(id).map_err(py_err)?.to_csv())
}

#[pymodule]
fn iars(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(parse_graph, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_strategies, m)?)?;
    m.add_function(wrap_pyfunction!(action_relation_csv, m)?)?;
    m.add_function(wrap_pyfunction!(is_iars, m)?)?;
    m.add_function(wrap_pyfunction!(nondet_iars, m)?)?;
    m.add_function(wrap_pyfunction!(stochastic_iars, m)?)?;
    m.add_function(wrap_pyfunction!(longest_iars, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_ids, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_graph, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_hcg, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_relation, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
