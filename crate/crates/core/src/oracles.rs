//! Brute-force baselines used as ground truth in tests and as reference
//! points in the benchmark. Nothing here shares code with the tree index.

use std::collections::BTreeSet;

use crate::ccq::Interval;
use crate::error::{Error, Result};
use crate::set_store::{Element, SetCollection, SetId};

fn check_strictly_ascending(xs: &[Element]) -> Result<()> {
    match xs.windows(2).position(|w| w[0] >= w[1]) {
        Some(p) => Err(Error::Unsorted { position: p + 1 }),
        None => Ok(()),
    }
}

/// Scans the shorter list and binary-searches each element in the longer one.
pub fn naive_sorted_intersect(a: &[Element], b: &[Element]) -> Result<Vec<Element>> {
    check_strictly_ascending(a)?;
    check_strictly_ascending(b)?;
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    Ok(small
        .iter()
        .copied()
        .filter(|x| large.binary_search(x).is_ok())
        .collect())
}

/// Iterates the smaller set and probes the larger set's hash table.
pub fn naive_hash_intersect(col: &SetCollection, i: SetId, j: SetId) -> Result<Vec<Element>> {
    let (a, b) = (col.set(i)?, col.set(j)?);
    let (small, other) = if a.len() <= b.len() { (a, j) } else { (b, i) };
    let mut out: Vec<Element> = small
        .iter()
        .copied()
        .filter(|&x| col.contains(other, x))
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// All pairwise intersection sizes, optionally with the intersections
/// themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecomputedMatrix {
    m: usize,
    sizes: Vec<u64>,
    contents: Option<Vec<Vec<Element>>>,
}

impl PrecomputedMatrix {
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn size(&self, i: SetId, j: SetId) -> u64 {
        self.sizes[i * self.m + j]
    }

    pub fn intersection(&self, i: SetId, j: SetId) -> Option<&[Element]> {
        self.contents.as_ref().map(|c| c[i * self.m + j].as_slice())
    }

    /// Rows of the size table.
    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.sizes
            .chunks(self.m.max(1))
            .map(<[u64]>::to_vec)
            .collect()
    }
}

/// Computes every pair with [`naive_hash_intersect`], refusing when the
/// tables would exceed `budget_bytes`.
pub fn precompute_matrix(
    col: &SetCollection,
    budget_bytes: u128,
    materialize: bool,
) -> Result<PrecomputedMatrix> {
    let m = col.len();
    let pairs = (m as u128) * (m as u128);
    let mut required = pairs * 8;
    if materialize {
        // Vec headers plus an upper bound on the stored elements.
        let mut sizes: Vec<u128> = col.sets().iter().map(|s| s.len() as u128).collect();
        sizes.sort_unstable();
        let min_sum: u128 = sizes
            .iter()
            .enumerate()
            .map(|(rank, &s)| s * (2 * (m - rank) as u128 - 1))
            .sum();
        required += pairs * 24 + min_sum * 8;
    }
    if required > budget_bytes {
        return Err(Error::Capacity {
            required,
            budget: budget_bytes,
        });
    }

    let mut sizes = vec![0u64; m * m];
    let mut contents = materialize.then(|| vec![Vec::new(); m * m]);
    for i in 0..m {
        for j in i..m {
            let r = naive_hash_intersect(col, i, j)?;
            sizes[i * m + j] = r.len() as u64;
            sizes[j * m + i] = r.len() as u64;
            if let Some(c) = contents.as_mut() {
                c[j * m + i] = r.clone();
                c[i * m + j] = r;
            }
        }
    }
    Ok(PrecomputedMatrix { m, sizes, contents })
}

/// Distinct colors present in both `A[i1]` and `A[i2]` (1-indexed,
/// inclusive), by direct scan. The intervals may overlap.
pub fn naive_common_colors(colors: &[u64], i1: Interval, i2: Interval) -> Result<Vec<u64>> {
    i1.check(colors.len())?;
    i2.check(colors.len())?;
    let first: BTreeSet<u64> = colors[i1.lo - 1..i1.hi].iter().copied().collect();
    let second: BTreeSet<u64> = colors[i2.lo - 1..i2.hi].iter().copied().collect();
    Ok(first.intersection(&second).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(sets: &[&[u64]]) -> SetCollection {
        SetCollection::from_sets(sets.iter().map(|s| s.to_vec()).collect(), false).unwrap()
    }

    #[test]
    fn sorted_intersect_examples() {
        assert_eq!(
            naive_sorted_intersect(&[1, 2, 3], &[2, 3, 4]).unwrap(),
            vec![2, 3]
        );
        assert!(naive_sorted_intersect(&[1], &[]).unwrap().is_empty());
        let a: Vec<u64> = (1..=100).collect();
        let b: Vec<u64> = (50..=150).collect();
        assert_eq!(
            naive_sorted_intersect(&a, &b).unwrap(),
            (50..=100).collect::<Vec<_>>()
        );
    }

    #[test]
    fn sorted_intersect_rejects_unsorted() {
        assert!(matches!(
            naive_sorted_intersect(&[1, 3, 2], &[1]),
            Err(Error::Unsorted { position: 2 })
        ));
        assert!(naive_sorted_intersect(&[1], &[4, 4]).is_err());
    }

    #[test]
    fn hash_intersect_examples() {
        let c = col(&[&[1, 2, 3], &[2, 3, 4]]);
        assert_eq!(naive_hash_intersect(&c, 0, 1).unwrap(), vec![2, 3]);
        assert_eq!(naive_hash_intersect(&c, 1, 1).unwrap(), vec![2, 3, 4]);
        let c = col(&[&[], &[5]]);
        assert!(naive_hash_intersect(&c, 0, 1).unwrap().is_empty());
        assert!(matches!(
            naive_hash_intersect(&c, 0, 2),
            Err(Error::SetIndex { id: 2, .. })
        ));
    }

    #[test]
    fn precomputed_sizes() {
        let c = col(&[&[1, 2, 3], &[2, 3, 4], &[6]]);
        let pm = precompute_matrix(&c, u128::MAX, true).unwrap();
        assert_eq!(pm.rows(), vec![vec![3, 2, 0], vec![2, 3, 0], vec![0, 0, 1]]);
        assert_eq!(pm.intersection(0, 1).unwrap(), &[2, 3]);

        let empty = precompute_matrix(&col(&[]), 0, false).unwrap();
        assert!(empty.is_empty());
        assert!(empty.rows().is_empty());

        let one = precompute_matrix(&col(&[&[1]]), 1024, false).unwrap();
        assert_eq!(one.rows(), vec![vec![1]]);
    }

    #[test]
    fn precompute_budget_exceeded() {
        let c = col(&[&[1], &[2], &[3]]);
        match precompute_matrix(&c, 10, false) {
            Err(Error::Capacity {
                required: 72,
                budget: 10,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn common_colors_scan() {
        let a = [1, 2, 1, 3, 2, 4, 1, 3];
        let got = naive_common_colors(&a, Interval::new(1, 3), Interval::new(4, 8)).unwrap();
        assert_eq!(got, vec![1, 2]);
        let got = naive_common_colors(&a, Interval::new(6, 6), Interval::new(6, 6)).unwrap();
        assert_eq!(got, vec![4]);
        let halves = [1, 2, 3, 4];
        assert!(
            naive_common_colors(&halves, Interval::new(1, 2), Interval::new(3, 4))
                .unwrap()
                .is_empty()
        );
        assert!(matches!(
            naive_common_colors(&a, Interval::new(0, 2), Interval::new(3, 4)),
            Err(Error::Range { .. })
        ));
        assert!(naive_common_colors(&a, Interval::new(1, 9), Interval::new(3, 4)).is_err());
    }
}
