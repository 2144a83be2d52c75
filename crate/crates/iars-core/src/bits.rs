//! Fixed-width bitsets over state, action and attribute indices.

use std::cmp::Ordering;

/// A set of indices below [`MAX_ELEMS`].
pub type Mask = u128;

/// Largest number of states, actions or attributes a mask can address.
pub const MAX_ELEMS: usize = 128;

#[inline]
pub fn bit(i: usize) -> Mask {
    1u128 << i
}

#[inline]
pub fn has(m: Mask, i: usize) -> bool {
    m >> i & 1 == 1
}

/// Mask holding indices `0..n`.
#[inline]
pub fn full(n: usize) -> Mask {
    if n >= MAX_ELEMS {
        Mask::MAX
    } else {
        bit(n) - 1
    }
}

#[inline]
pub fn len(m: Mask) -> usize {
    m.count_ones() as usize
}

/// Indices in ascending order.
pub fn iter(mut m: Mask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Mask {
    it.into_iter().fold(0, |m, i| m | bit(i))
}

/// Lexicographic comparison of the ascending index lists of two masks.
pub fn lex_cmp(a: Mask, b: Mask) -> Ordering {
    let diff = a ^ b;
    if diff == 0 {
        return Ordering::Equal;
    }
    let d = diff.trailing_zeros() as usize;
    let above = !full(d + 1);
    if has(a, d) {
        // b lacks d: b continues with something larger, or stops
        if b & above != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    } else if a & above != 0 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Size first, then [`lex_cmp`].
pub fn shortlex_cmp(a: Mask, b: Mask) -> Ordering {
    len(a).cmp(&len(b)).then_with(|| lex_cmp(a, b))
}

/// All submasks of `m` with exactly `k` elements, in lexicographic order.
pub fn combinations(m: Mask, k: usize) -> impl Iterator<Item = Mask> {
    use itertools::Itertools;
    let idx: Vec<usize> = iter(m).collect();
    idx.into_iter().combinations(k).map(from_indices)
}
