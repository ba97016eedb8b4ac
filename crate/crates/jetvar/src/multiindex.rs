//! Symmetric multi-indices over base indices `1..=n`.
//!
//! A multi-index is an unordered tuple of base directions; it is the
//! subscript `I` of a jet coordinate `u[I]`. Two tuples differing only by
//! the order of their entries denote the same index, so the canonical
//! representative stored here is the ascending sorted tuple. Equality of
//! multi-indices is then plain structural equality.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex {
    n: u8,
    entries: Vec<u8>,
}

impl MultiIndex {
    /// Canonical (sorted) multi-index from an arbitrary entry tuple.
    pub fn new(n: u8, entries: &[u8]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("base dimension must be at least 1".into()));
        }
        for &e in entries {
            if e == 0 || e > n {
                return Err(Error::IndexOutOfRange {
                    index: e as usize,
                    max: n as usize,
                });
            }
        }
        let mut entries = entries.to_vec();
        entries.sort_unstable();
        Ok(MultiIndex { n, entries })
    }

    pub fn empty(n: u8) -> Self {
        MultiIndex { n, entries: Vec::new() }
    }

    /// The length `|I|`.
    pub fn order(&self) -> usize {
        self.entries.len()
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The concatenation `Ii`, canonicalized by sorted insertion.
    pub fn concat(&self, i: u8) -> Result<Self> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange {
                index: i as usize,
                max: self.n as usize,
            });
        }
        let mut entries = self.entries.clone();
        let pos = entries.partition_point(|&e| e <= i);
        entries.insert(pos, i);
        Ok(MultiIndex { n: self.n, entries })
    }

    /// The symbol `delta(I, K)`: 1 if `I` and `K` coincide as multisets, else 0.
    pub fn delta(&self, other: &Self) -> u8 {
        u8::from(self.n == other.n && self.entries == other.entries)
    }

    /// Count how many times direction `i` occurs in `I`.
    pub fn count(&self, i: u8) -> usize {
        self.entries.iter().filter(|&&e| e == i).count()
    }

    /// All distinct ways of writing `self = Ji`: pairs `(J, i)` with one
    /// entry removed. This enumerates exactly the `(J, i)` for which
    /// `delta(self, Ji) = 1`; for `I = (1,2)` it yields `((2), 1)` and
    /// `((1), 2)`.
    pub fn splits(&self) -> Vec<(MultiIndex, u8)> {
        let mut out = Vec::new();
        let mut seen: Option<u8> = None;
        for (pos, &i) in self.entries.iter().enumerate() {
            if seen == Some(i) {
                continue;
            }
            seen = Some(i);
            let mut rest = self.entries.clone();
            rest.remove(pos);
            out.push((MultiIndex { n: self.n, entries: rest }, i));
        }
        out
    }

    /// True if `other` is a sub-multiset of `self`.
    pub fn contains(&self, other: &Self) -> bool {
        if self.n != other.n {
            return false;
        }
        (1..=self.n).all(|i| self.count(i) >= other.count(i))
    }

    /// Multiset difference `self - other`; `other` must be contained.
    pub fn minus(&self, other: &Self) -> Result<Self> {
        if !self.contains(other) {
            return Err(Error::Invalid(format!("{other} is not contained in {self}")));
        }
        let mut entries = self.entries.clone();
        for &i in other.entries() {
            let pos = entries.iter().position(|&e| e == i).unwrap();
            entries.remove(pos);
        }
        Ok(MultiIndex { n: self.n, entries })
    }

    /// Multiset union `self + other`.
    pub fn plus(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(other.entries());
        entries.sort_unstable();
        MultiIndex { n: self.n, entries }
    }

    /// All multi-indices with `|I| <= k`, ordered by length then
    /// lexicographically. This total order fixes matrix row/column layouts
    /// everywhere downstream.
    pub fn enumerate(n: u8, k: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for len in 0..=k {
            out.extend(Self::enumerate_exact(n, len));
        }
        out
    }

    /// All multi-indices with `|I| = k`, lexicographic.
    pub fn enumerate_exact(n: u8, k: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(k);
        fn rec(n: u8, k: usize, start: u8, current: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
            if current.len() == k {
                out.push(MultiIndex { n, entries: current.clone() });
                return;
            }
            for i in start..=n {
                current.push(i);
                rec(n, k, i, current, out);
                current.pop();
            }
        }
        rec(n, k, 1, &mut current, &mut out);
        out
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    /// Length first, then lexicographic — the `enumerate` order.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.entries
            .len()
            .cmp(&other.entries.len())
            .then_with(|| self.entries.cmp(&other.entries))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, e) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(n: u8, e: &[u8]) -> MultiIndex {
        MultiIndex::new(n, e).unwrap()
    }

    #[test]
    fn concat_sorts() {
        assert_eq!(mi(2, &[1, 2]).concat(1).unwrap(), mi(2, &[1, 1, 2]));
        assert_eq!(MultiIndex::empty(3).concat(3).unwrap(), mi(3, &[3]));
        assert_eq!(mi(2, &[2, 2]).concat(1).unwrap(), mi(2, &[1, 2, 2]));
    }

    #[test]
    fn concat_out_of_range() {
        assert!(mi(2, &[1]).concat(3).is_err());
        assert!(mi(2, &[1]).concat(0).is_err());
    }

    #[test]
    fn delta_is_order_insensitive() {
        assert_eq!(mi(2, &[1, 2]).delta(&mi(2, &[2, 1])), 1);
        assert_eq!(mi(2, &[1, 1]).delta(&mi(2, &[1, 2])), 0);
        assert_eq!(MultiIndex::empty(2).delta(&MultiIndex::empty(2)), 1);
    }

    #[test]
    fn enumerate_small() {
        let e = MultiIndex::enumerate(2, 1);
        assert_eq!(e, vec![MultiIndex::empty(2), mi(2, &[1]), mi(2, &[2])]);
        let e = MultiIndex::enumerate(2, 2);
        assert_eq!(e.len(), 6);
        assert_eq!(
            e,
            vec![
                MultiIndex::empty(2),
                mi(2, &[1]),
                mi(2, &[2]),
                mi(2, &[1, 1]),
                mi(2, &[1, 2]),
                mi(2, &[2, 2]),
            ]
        );
        let e = MultiIndex::enumerate(1, 3);
        assert_eq!(
            e,
            vec![MultiIndex::empty(1), mi(1, &[1]), mi(1, &[1, 1]), mi(1, &[1, 1, 1])]
        );
    }

    #[test]
    fn enumerate_count_matches_binomial() {
        // |enumerate(n, k)| = C(n + k, k), checked against the generator.
        fn binom(n: usize, k: usize) -> usize {
            // C(n + k, k)
            let mut r = 1usize;
            for j in 0..k {
                r = r * (n + j + 1) / (j + 1);
            }
            r
        }
        for n in 1..=4u8 {
            for k in 0..=4usize {
                assert_eq!(MultiIndex::enumerate(n, k).len(), binom(n as usize, k));
            }
        }
    }

    #[test]
    fn splits_enumerate_delta_pairs() {
        let i = mi(2, &[1, 2]);
        let s = i.splits();
        assert_eq!(s, vec![(mi(2, &[2]), 1), (mi(2, &[1]), 2)]);
        // splits of (1,1) collapse the repeated entry
        assert_eq!(mi(2, &[1, 1]).splits(), vec![(mi(2, &[1]), 1)]);
        // each split (J, i) satisfies delta(I, Ji) = 1
        for (j, dir) in mi(3, &[1, 2, 2, 3]).splits() {
            assert_eq!(mi(3, &[1, 2, 2, 3]).delta(&j.concat(dir).unwrap()), 1);
        }
    }

    #[test]
    fn concat_commutes() {
        let i = mi(3, &[2]);
        let a = i.concat(1).unwrap().concat(3).unwrap();
        let b = i.concat(3).unwrap().concat(1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ordering_is_length_then_lex() {
        let e = MultiIndex::enumerate(2, 3);
        let mut sorted = e.clone();
        sorted.sort();
        assert_eq!(e, sorted);
    }
}
