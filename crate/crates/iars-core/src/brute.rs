//! Exhaustive search for release sequences inside an attribute set.
//!
//! Whether an element may follow a prefix depends only on the prefix as a
//! set, so the search walks subsets reachable by informative extension.

use std::collections::HashMap;

use serde::Serialize;

use crate::bits::{self, Mask};
use crate::dowker::Relation;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::strategy::{action_relation, Budget};

pub const DEFAULT_NODE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Longest {
    pub length: usize,
    pub witness: Vec<usize>,
}

struct Walk<'a> {
    rel: &'a Relation,
    closures: HashMap<Mask, Mask>,
    limit: usize,
}

impl Walk<'_> {
    fn closure(&mut self, s: Mask) -> Result<Mask> {
        if let Some(&c) = self.closures.get(&s) {
            return Ok(c);
        }
        if self.closures.len() >= self.limit {
            return Err(Error::Budget { what: "release sequence search", limit: self.limit });
        }
        let c = self.rel.closure(s)?.0;
        self.closures.insert(s, c);
        Ok(c)
    }
}

fn check_within(rel: &Relation, within: Mask) -> Result<()> {
    if within & !rel.all_attributes() != 0 {
        return Err(Error::UnknownAttribute("outside the relation".into()));
    }
    Ok(())
}

/// Longest release sequence using only attributes of `within`, plus a witness.
pub fn longest_iars(rel: &Relation, within: Mask, limit: usize) -> Result<Longest> {
    check_within(rel, within)?;
    let mut walk = Walk { rel, closures: HashMap::new(), limit };
    // best continuation length and next element from each reachable set
    let mut memo: HashMap<Mask, (usize, Option<usize>)> = HashMap::new();
    fn go(s: Mask, within: Mask, walk: &mut Walk, memo: &mut HashMap<Mask, (usize, Option<usize>)>) -> Result<usize> {
        if let Some(&(len, _)) = memo.get(&s) {
            return Ok(len);
        }
        let c = walk.closure(s)?;
        let mut best = (0, None);
        for y in bits::iter(within & !s & !c) {
            let len = 1 + go(s | bits::bit(y), within, walk, memo)?;
            if len > best.0 {
                best = (len, Some(y));
            }
        }
        memo.insert(s, best);
        Ok(best.0)
    }
    let length = go(0, within, &mut walk, &mut memo)?;
    let mut witness = Vec::new();
    let mut s = 0;
    while let Some(&(_, Some(y))) = memo.get(&s) {
        witness.push(y);
        s |= bits::bit(y);
    }
    Ok(Longest { length, witness })
}

/// Number of orderings of all of `within` that are release sequences.
pub fn count_full_iars(rel: &Relation, within: Mask, limit: usize) -> Result<u128> {
    check_within(rel, within)?;
    let mut walk = Walk { rel, closures: HashMap::new(), limit };
    let mut memo: HashMap<Mask, u128> = HashMap::new();
    fn go(s: Mask, within: Mask, walk: &mut Walk, memo: &mut HashMap<Mask, u128>) -> Result<u128> {
        if s == within {
            return Ok(1);
        }
        if let Some(&n) = memo.get(&s) {
            return Ok(n);
        }
        let c = walk.closure(s)?;
        let mut total = 0;
        for y in bits::iter(within & !s & !c) {
            total += go(s | bits::bit(y), within, walk, memo)?;
        }
        memo.insert(s, total);
        Ok(total)
    }
    if within == 0 {
        return Ok(0);
    }
    go(0, within, &mut walk, &mut memo)
}

/// Longest release sequence for `g`'s action relation inside strategy `sigma`.
pub fn brute_force_longest_iars(g: &Graph, sigma: Mask, budget: Budget) -> Result<Longest> {
    let rel = action_relation(g, budget)?;
    longest_iars(&rel, sigma, DEFAULT_NODE_LIMIT)
}
