//! The set collection `D`: `m` sets of `u64` element ids with constant-time
//! membership in both directions.
//!
//! Sets File Format: one set per line, elements in base 10 separated by a
//! single space, a blank line is an empty set, the trailing newline is
//! optional. Set ids are the 0-based line numbers.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Set id within a [`SetCollection`].
pub type SetId = usize;

/// Element id.
pub type Element = u64;

/// An immutable collection of sets.
///
/// # Invariants
/// - every set is strictly ascending (hence duplicate-free)
/// - `total_size` is the sum of the set cardinalities
/// - `contains(i, x)` iff `x` is listed in set `i` iff `i` is in `sets_of(x)`
#[derive(Debug, Clone)]
pub struct SetCollection {
    sets: Vec<Vec<Element>>,
    total_size: usize,
    universe_bound: Element,
    membership: Vec<HashSet<Element>>,
    inverse: HashMap<Element, Vec<u32>>,
}

impl SetCollection {
    /// Builds a collection from in-memory sets.
    ///
    /// Elements may come in any order. A repeated element inside one set is
    /// rejected unless `dedupe` is set, in which case it is dropped.
    pub fn from_sets(sets: Vec<Vec<Element>>, dedupe: bool) -> Result<Self> {
        let mut sorted = Vec::with_capacity(sets.len());
        for (id, mut set) in sets.into_iter().enumerate() {
            set.sort_unstable();
            let before = set.len();
            if !dedupe {
                if let Some(w) = set.windows(2).find(|w| w[0] == w[1]) {
                    return Err(Error::DuplicateElement {
                        set: id,
                        element: w[0],
                    });
                }
            }
            set.dedup();
            debug_assert!(dedupe || set.len() == before);
            sorted.push(set);
        }
        Ok(Self::from_sorted_unchecked(sorted))
    }

    /// Builds from sets that are already strictly ascending.
    pub(crate) fn from_sorted_unchecked(sets: Vec<Vec<Element>>) -> Self {
        let total_size = sets.iter().map(Vec::len).sum();
        let universe_bound = sets
            .iter()
            .filter_map(|s| s.last().copied())
            .max()
            .unwrap_or(0);
        let membership = sets
            .iter()
            .map(|s| s.iter().copied().collect::<HashSet<_>>())
            .collect();
        let mut inverse: HashMap<Element, Vec<u32>> = HashMap::new();
        for (id, set) in sets.iter().enumerate() {
            for &x in set {
                inverse.entry(x).or_default().push(id as u32);
            }
        }
        SetCollection {
            sets,
            total_size,
            universe_bound,
            membership,
            inverse,
        }
    }

    /// Parses a Sets File.
    pub fn load<R: Read>(mut source: R, dedupe: bool) -> Result<Self> {
        let mut text = String::new();
        source.read_to_string(&mut text).map_err(|e| {
            if e.kind() == std::io::ErrorKind::InvalidData {
                Error::Parse {
                    line: 0,
                    message: "input is not valid UTF-8".into(),
                }
            } else {
                Error::Io(e)
            }
        })?;
        Self::parse(&text, dedupe)
    }

    pub fn parse(text: &str, dedupe: bool) -> Result<Self> {
        let mut sets = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if line.is_empty() {
                sets.push(Vec::new());
                continue;
            }
            let set = line
                .split(' ')
                .map(|tok| {
                    tok.parse::<Element>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: if tok.is_empty() {
                            "elements must be separated by a single space".into()
                        } else {
                            format!("invalid element {tok:?}")
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            sets.push(set);
        }
        Self::from_sets(sets, dedupe)
    }

    /// Writes the collection in the Sets File Format, elements ascending.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for set in &self.sets {
            let mut first = true;
            for x in set {
                if !first {
                    out.write_all(b" ")?;
                }
                write!(out, "{x}")?;
                first = false;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Number of sets, `m`.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Sum of set sizes, `N`.
    pub fn total_size(&self) -> usize {
        self.total_size
    }

    /// Largest element id present (0 for an empty collection).
    pub fn universe_bound(&self) -> Element {
        self.universe_bound
    }

    /// The sets, each strictly ascending.
    pub fn sets(&self) -> &[Vec<Element>] {
        &self.sets
    }

    pub fn set(&self, id: SetId) -> Result<&[Element]> {
        self.check(id)?;
        Ok(&self.sets[id])
    }

    pub(crate) fn check(&self, id: SetId) -> Result<()> {
        if id < self.sets.len() {
            Ok(())
        } else {
            Err(Error::SetIndex {
                id,
                len: self.sets.len(),
            })
        }
    }

    /// Hash-table membership test for set `id`.
    pub fn membership(&self, id: SetId, x: Element) -> Result<bool> {
        self.check(id)?;
        Ok(self.membership[id].contains(&x))
    }

    /// Unchecked variant used on hot query paths with validated ids.
    #[inline]
    pub(crate) fn contains(&self, id: SetId, x: Element) -> bool {
        self.membership[id].contains(&x)
    }

    /// Ascending ids of the sets containing `x`.
    pub fn sets_of(&self, x: Element) -> &[u32] {
        self.inverse.get(&x).map_or(&[], Vec::as_slice)
    }

    /// Every distinct element with the ascending ids of its sets, in no
    /// particular order.
    pub(crate) fn element_owners(&self) -> impl Iterator<Item = (Element, &[u32])> {
        self.inverse.iter().map(|(&x, ids)| (x, ids.as_slice()))
    }

    /// Number of distinct elements across all sets.
    pub fn distinct_elements(&self) -> usize {
        self.inverse.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(text: &str) -> SetCollection {
        SetCollection::parse(text, false).unwrap()
    }

    #[test]
    fn loads_two_sets() {
        let c = col("1 2 3\n2 3 4\n");
        assert_eq!(c.len(), 2);
        assert_eq!(c.total_size(), 6);
        assert_eq!(c.universe_bound(), 4);
    }

    #[test]
    fn empty_stream() {
        let c = SetCollection::load(&b""[..], false).unwrap();
        assert_eq!(c.len(), 0);
        assert_eq!(c.total_size(), 0);
    }

    #[test]
    fn blank_line_is_empty_set_and_trailing_newline_optional() {
        let c = col("1\n\n2");
        assert_eq!(c.len(), 3);
        assert!(c.set(1).unwrap().is_empty());
        assert_eq!(c.set(2).unwrap(), &[2]);
    }

    #[test]
    fn dedupe_flag() {
        let c = SetCollection::parse("5 5 6\n", true).unwrap();
        assert_eq!(c.set(0).unwrap(), &[5, 6]);
        assert_eq!(c.total_size(), 2);

        match SetCollection::parse("1\n5 5 6\n", false) {
            Err(Error::DuplicateElement { set: 1, element: 5 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_report_line_number() {
        for bad in ["1 2\n3 x\n", "1 2\n3  4\n", "1 2\n-3\n"] {
            match SetCollection::parse(bad, false) {
                Err(Error::Parse { line: 2, .. }) => {}
                other => panic!("{bad:?}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn membership_both_directions() {
        let c = col("1 2 3\n2 3 4\n");
        assert!(c.membership(0, 2).unwrap());
        assert!(!c.membership(1, 1).unwrap());
        assert!(!c.membership(0, 1_000_000).unwrap());
        assert!(matches!(
            c.membership(2, 1),
            Err(Error::SetIndex { id: 2, len: 2 })
        ));
        assert_eq!(c.sets_of(3), &[0, 1]);
        assert!(c.sets_of(9).is_empty());

        let c = col("5\n5\n5\n");
        assert_eq!(c.sets_of(5), &[0, 1, 2]);
    }

    #[test]
    fn write_is_ascending() {
        let c = col("3 1 2\n\n9\n");
        let mut out = Vec::new();
        c.write(&mut out).unwrap();
        assert_eq!(out, b"1 2 3\n\n9\n");
    }
}
