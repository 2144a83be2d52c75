//! Relations between individuals and attributes: interpretation maps,
//! closures, identifiability, faces and the release-sequence verifier.

use std::collections::HashMap;

use serde::Serialize;

use crate::bits::{self, Mask, MAX_ELEMS};
use crate::error::{Error, Result};
use crate::strategy::Budget;

/// A relation on individuals × attributes, stored as one attribute mask per
/// individual. Rows may carry a goal annotation (action relations do).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    individuals: Vec<String>,
    attributes: Vec<String>,
    rows: Vec<Mask>,
    goals: Option<Vec<Vec<String>>>,
    attr_ix: HashMap<String, usize>,
    indiv_ix: HashMap<String, usize>,
}

/// Outcome of checking a candidate release sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IarsCheck {
    pub valid: bool,
    /// 1-based position of the first element inferable from its prefix.
    pub first_failure: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FaceReport {
    pub free_faces: Vec<Mask>,
    pub minimal_nonfaces: Vec<Mask>,
    pub cone_apexes: Vec<usize>,
}

impl Relation {
    pub fn new(individuals: Vec<String>, attributes: Vec<String>, rows: Vec<Mask>) -> Result<Relation> {
        Self::build(individuals, attributes, rows, None)
    }

    pub fn with_goals(
        individuals: Vec<String>,
        attributes: Vec<String>,
        rows: Vec<Mask>,
        goals: Vec<Vec<String>>,
    ) -> Result<Relation> {
        if goals.len() != rows.len() {
            return Err(Error::Relation("one goal set per row is required".into()));
        }
        Self::build(individuals, attributes, rows, Some(goals))
    }

    fn build(
        individuals: Vec<String>,
        attributes: Vec<String>,
        rows: Vec<Mask>,
        goals: Option<Vec<Vec<String>>>,
    ) -> Result<Relation> {
        if individuals.is_empty() || attributes.is_empty() {
            return Err(Error::Relation("individuals and attributes must be nonempty".into()));
        }
        if individuals.len() != rows.len() {
            return Err(Error::Relation("one row per individual is required".into()));
        }
        if attributes.len() > MAX_ELEMS {
            return Err(Error::TooLarge { what: "attribute count", limit: MAX_ELEMS });
        }
        let mut attr_ix = HashMap::new();
        for (i, a) in attributes.iter().enumerate() {
            if attr_ix.insert(a.clone(), i).is_some() {
                return Err(Error::Duplicate(a.clone()));
            }
        }
        let mut indiv_ix = HashMap::new();
        for (i, x) in individuals.iter().enumerate() {
            if indiv_ix.insert(x.clone(), i).is_some() {
                return Err(Error::Duplicate(x.clone()));
            }
        }
        let all = bits::full(attributes.len());
        if rows.iter().any(|&r| r & !all != 0) {
            return Err(Error::Relation("row refers to a missing attribute".into()));
        }
        Ok(Relation { individuals, attributes, rows, goals, attr_ix, indiv_ix })
    }

    pub fn individuals(&self) -> &[String] {
        &self.individuals
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn rows(&self) -> &[Mask] {
        &self.rows
    }

    pub fn goals(&self) -> Option<&[Vec<String>]> {
        self.goals.as_deref()
    }

    pub fn n_individuals(&self) -> usize {
        self.individuals.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn all_attributes(&self) -> Mask {
        bits::full(self.attributes.len())
    }

    pub fn attribute_index(&self, id: &str) -> Option<usize> {
        self.attr_ix.get(id).copied()
    }

    pub fn individual_index(&self, id: &str) -> Option<usize> {
        self.indiv_ix.get(id).copied()
    }

    pub fn attribute_mask<S: AsRef<str>>(&self, ids: &[S]) -> Result<Mask> {
        ids.iter().try_fold(0, |acc, id| {
            let id = id.as_ref();
            self.attribute_index(id)
                .map(|i| acc | bits::bit(i))
                .ok_or_else(|| Error::UnknownAttribute(id.to_string()))
        })
    }

    pub fn attribute_ids(&self, m: Mask) -> Vec<String> {
        bits::iter(m).map(|i| self.attributes[i].clone()).collect()
    }

    pub fn individual_ids(&self, xs: &[usize]) -> Vec<String> {
        xs.iter().map(|&x| self.individuals[x].clone()).collect()
    }

    pub fn individual_indices<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>> {
        let mut out: Vec<usize> = ids
            .iter()
            .map(|id| {
                let id = id.as_ref();
                self.individual_index(id).ok_or_else(|| Error::UnknownIndividual(id.to_string()))
            })
            .collect::<Result<_>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Attributes shared by every listed individual; all attributes for none.
    pub fn phi(&self, xs: &[usize]) -> Result<Mask> {
        xs.iter().try_fold(self.all_attributes(), |acc, &x| {
            self.rows
                .get(x)
                .map(|r| acc & r)
                .ok_or_else(|| Error::UnknownIndividual(format!("#{x}")))
        })
    }

    /// Individuals holding every attribute of `m`; everyone for the empty set.
    pub fn psi(&self, m: Mask) -> Result<Vec<usize>> {
        if m & !self.all_attributes() != 0 {
            return Err(Error::UnknownAttribute(format!("#{}", (m & !self.all_attributes()).trailing_zeros())));
        }
        Ok((0..self.rows.len()).filter(|&x| self.rows[x] & m == m).collect())
    }

    /// `(closure, implied)` with closure = φ(ψ(m)) and implied = closure ∖ m.
    pub fn closure(&self, m: Mask) -> Result<(Mask, Mask)> {
        let c = self.phi(&self.psi(m)?)?;
        Ok((c, c & !m))
    }

    /// Whether ψ(m) is nonempty, i.e. `m` is a simplex of the attribute complex.
    pub fn is_face(&self, m: Mask) -> bool {
        self.rows.iter().any(|&r| r & m == m)
    }

    /// Checks that no element lies in the closure of its predecessors.
    pub fn is_iars(&self, seq: &[usize]) -> Result<IarsCheck> {
        if seq.is_empty() {
            return Err(Error::Precondition("a release sequence must be nonempty".into()));
        }
        let mut prefix: Mask = 0;
        let mut failure = None;
        for (i, &y) in seq.iter().enumerate() {
            if y >= self.attributes.len() {
                return Err(Error::UnknownAttribute(format!("#{y}")));
            }
            if bits::has(prefix, y) {
                return Err(Error::Duplicate(self.attributes[y].clone()));
            }
            if failure.is_none() && bits::has(self.closure(prefix)?.0, y) {
                failure = Some(i + 1);
            }
            prefix |= bits::bit(y);
        }
        Ok(IarsCheck { valid: failure.is_none(), first_failure: failure })
    }

    pub fn is_iars_ids<S: AsRef<str>>(&self, seq: &[S]) -> Result<IarsCheck> {
        let idx = seq
            .iter()
            .map(|s| {
                let s = s.as_ref();
                self.attribute_index(s).ok_or_else(|| Error::UnknownAttribute(s.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.is_iars(&idx)
    }

    /// ψ(φ({x})) = {x}.
    pub fn is_identifiable(&self, x: usize) -> Result<bool> {
        let row = *self.rows.get(x).ok_or_else(|| Error::UnknownIndividual(format!("#{x}")))?;
        Ok(self.psi(row)? == vec![x])
    }

    /// Distinct rows not strictly contained in another row, lexicographically.
    pub fn maximal_faces(&self) -> Vec<Mask> {
        let mut out: Vec<Mask> = Vec::new();
        for &r in &self.rows {
            let dominated = self.rows.iter().any(|&s| s != r && s & r == r);
            if !dominated && !out.contains(&r) {
                out.push(r);
            }
        }
        out.sort_by(|&a, &b| bits::lex_cmp(a, b));
        out
    }

    /// Minimal attribute sets no individual holds, lexicographically.
    pub fn minimal_nonfaces(&self, budget: Budget) -> Result<Vec<Mask>> {
        let mut out = Vec::new();
        let mut visited = 0usize;
        self.nonface_dfs(0, 0, &mut out, &mut visited, budget.max_nodes)?;
        out.sort_by(|&a, &b| bits::lex_cmp(a, b));
        Ok(out)
    }

    fn nonface_dfs(&self, from: usize, s: Mask, out: &mut Vec<Mask>, visited: &mut usize, limit: usize) -> Result<()> {
        *visited += 1;
        if *visited > limit {
            return Err(Error::Budget { what: "attribute nonface enumeration", limit });
        }
        for y in from..self.attributes.len() {
            let t = s | bits::bit(y);
            if self.is_face(t) {
                self.nonface_dfs(y + 1, t, out, visited, limit)?;
            } else if bits::iter(s).all(|x| self.is_face(t & !bits::bit(x))) {
                out.push(t);
            }
        }
        Ok(())
    }

    /// Free faces (nonempty proper subsets of exactly one maximal face, in
    /// size-then-lexicographic order), cone apexes and minimal nonfaces.
    pub fn face_report(&self, budget: Budget) -> Result<FaceReport> {
        let maximal = self.maximal_faces();
        let work: usize = maximal
            .iter()
            .map(|&m| 1usize.checked_shl(bits::len(m) as u32).unwrap_or(usize::MAX))
            .fold(0usize, |a, b| a.saturating_add(b));
        if work > budget.max_nodes {
            return Err(Error::Budget { what: "free face enumeration", limit: budget.max_nodes });
        }
        let mut free = Vec::new();
        for &m in &maximal {
            let elems: Vec<usize> = bits::iter(m).collect();
            for k in 1..elems.len() {
                for f in bits::combinations(m, k) {
                    if maximal.iter().filter(|&&o| o & f == f).count() == 1 {
                        free.push(f);
                    }
                }
            }
        }
        free.sort_by(|&a, &b| bits::shortlex_cmp(a, b));
        let apex = maximal.iter().fold(self.all_attributes(), |acc, &m| acc & m);
        Ok(FaceReport {
            free_faces: free,
            minimal_nonfaces: self.minimal_nonfaces(budget)?,
            cone_apexes: bits::iter(apex).collect(),
        })
    }

    /// CSV with a key column, one `1`/empty cell per attribute and, when
    /// present, a trailing goal column of space-separated states.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = vec![if self.goals.is_some() { "strategy" } else { "individual" }.to_string()];
        header.extend(self.attributes.iter().cloned());
        if self.goals.is_some() {
            header.push("goal".into());
        }
        w.write_record(&header).expect("in-memory write");
        for (x, &r) in self.rows.iter().enumerate() {
            let mut rec = vec![self.individuals[x].clone()];
            rec.extend((0..self.attributes.len()).map(|y| if bits::has(r, y) { "1" } else { "" }.to_string()));
            if let Some(g) = &self.goals {
                rec.push(g[x].join(" "));
            }
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn from_csv(text: &str) -> Result<Relation> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Relation(e.to_string()))?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        if header.len() < 2 {
            return Err(Error::Relation("header needs a key column and attributes".into()));
        }
        let has_goal = header.last().is_some_and(|h| h == "goal");
        let end = if has_goal { header.len() - 1 } else { header.len() };
        let attributes = header[1..end].to_vec();
        let mut individuals = Vec::new();
        let mut rows = Vec::new();
        let mut goals = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Relation(e.to_string()))?;
            if rec.len() != header.len() {
                return Err(Error::Relation(format!("row {} has {} cells, expected {}", i + 1, rec.len(), header.len())));
            }
            individuals.push(rec[0].trim().to_string());
            let mut m: Mask = 0;
            for (y, cell) in rec.iter().skip(1).take(attributes.len()).enumerate() {
                match cell.trim() {
                    "1" => m |= bits::bit(y),
                    "" | "0" => {}
                    other => return Err(Error::Relation(format!("row {}: bad cell `{other}`", i + 1))),
                }
            }
            rows.push(m);
            if has_goal {
                goals.push(rec[end].split_whitespace().map(str::to_string).collect());
            }
        }
        if has_goal {
            Relation::with_goals(individuals, attributes, rows, goals)
        } else {
            Relation::new(individuals, attributes, rows)
        }
    }
}
