//! Interactive reveal sessions over a relation.

use serde::Serialize;

use crate::bits::{self, Mask};
use crate::dowker::Relation;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RevealSession {
    relation: Relation,
    revealed: Vec<usize>,
    informative: Vec<bool>,
}

/// Snapshot of a session as served to clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionView {
    pub revealed: Vec<String>,
    pub consistent: Vec<String>,
    pub implied: Vec<String>,
    pub informative: Vec<bool>,
    pub inconsistent: bool,
    pub goal_candidates: Vec<Vec<String>>,
}

impl RevealSession {
    pub fn start(relation: Relation) -> RevealSession {
        RevealSession { relation, revealed: Vec::new(), informative: Vec::new() }
    }

    pub fn relation(&self) -> &Relation {
        &self.relation
    }

    fn revealed_mask(&self) -> Mask {
        bits::from_indices(self.revealed.iter().copied())
    }

    /// Appends an attribute; the flag records whether it was informative.
    pub fn reveal(&mut self, attribute: &str) -> Result<bool> {
        let y = self
            .relation
            .attribute_index(attribute)
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
        let prior = self.revealed_mask();
        if bits::has(prior, y) {
            return Err(Error::Duplicate(attribute.to_string()));
        }
        let informative = !bits::has(self.relation.closure(prior)?.0, y);
        self.revealed.push(y);
        self.informative.push(informative);
        Ok(informative)
    }

    pub fn view(&self) -> SessionView {
        let rel = &self.relation;
        let m = self.revealed_mask();
        let consistent = rel.psi(m).expect("revealed attributes belong to the relation");
        let closure = rel.phi(&consistent).expect("indices come from psi");
        let goal_candidates = match rel.goals() {
            Some(goals) => consistent.iter().map(|&x| goals[x].clone()).collect(),
            None => Vec::new(),
        };
        SessionView {
            revealed: self.revealed.iter().map(|&y| rel.attributes()[y].clone()).collect(),
            consistent: rel.individual_ids(&consistent),
            implied: rel.attribute_ids(closure & !m),
            informative: self.informative.clone(),
            inconsistent: consistent.is_empty(),
            goal_candidates,
        }
    }
}
