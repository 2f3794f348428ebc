use std::collections::HashMap;

use super::{BuildConfig, FsiIndex, FsiNode, NodeSubsets, RootSummary, SubsetMode};
use crate::bitmatrix::BitMatrix;
use crate::set_store::{Element, SetCollection, SetId};

/// Element partition produced at one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub left: Vec<Element>,
    pub remarked: Option<Element>,
    pub right: Vec<Element>,
}

/// Index of the first `(element, multiplicity)` entry that would push the
/// running cost over `node_cost / 2`.
fn greedy_cut(counts: impl IntoIterator<Item = u64>, node_cost: u64) -> Option<usize> {
    let mut cum = 0u64;
    for (k, mult) in counts.into_iter().enumerate() {
        if 2 * (cum + mult) > node_cost {
            return Some(k);
        }
        cum += mult;
    }
    None
}

/// Splits the union of `group` into `(E₁, e, E₂)` for a node costing
/// `node_cost`: elements are taken in ascending order into `E₁` while its cost
/// (summed multiplicities) stays within `node_cost / 2`; the first element that
/// does not fit becomes `e` and the rest form `E₂`.
pub fn split_node(group: &[(SetId, &[Element])], node_cost: u64) -> Split {
    let mut all: Vec<Element> = group.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    all.sort_unstable();
    let mut counts: Vec<(Element, u64)> = Vec::new();
    for x in all {
        match counts.last_mut() {
            Some((y, c)) if *y == x => *c += 1,
            _ => counts.push((x, 1)),
        }
    }
    match greedy_cut(counts.iter().map(|&(_, c)| c), node_cost) {
        Some(k) => Split {
            left: counts[..k].iter().map(|&(x, _)| x).collect(),
            remarked: Some(counts[k].0),
            right: counts[k + 1..].iter().map(|&(x, _)| x).collect(),
        },
        None => Split {
            left: counts.into_iter().map(|(x, _)| x).collect(),
            remarked: None,
            right: Vec::new(),
        },
    }
}

/// `(set id, ascending node subset)`, sorted by set id.
type Group = Vec<(u32, Vec<Element>)>;

struct Builder {
    config: BuildConfig,
    nodes: Vec<FsiNode>,
    /// Compact mode: rank → element, filled in placement order.
    order: Vec<Element>,
}

pub(super) fn build(collection: SetCollection, config: BuildConfig) -> FsiIndex {
    assert!(
        config.leaf_threshold >= 1,
        "leaf_threshold must be at least 1"
    );
    let group: Group = collection
        .sets()
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(id, s)| (id as u32, s.clone()))
        .collect();

    let mut builder = Builder {
        config,
        nodes: Vec::new(),
        order: Vec::new(),
    };
    builder.node(group, 0);

    let (order, rank_arrays) = match config.subset_mode {
        SubsetMode::Explicit => (Vec::new(), Vec::new()),
        SubsetMode::Compact => {
            let order = builder.order;
            let rank: HashMap<Element, u32> = order
                .iter()
                .enumerate()
                .map(|(r, &x)| (x, r as u32))
                .collect();
            let rank_arrays = collection
                .sets()
                .iter()
                .map(|s| {
                    let mut r: Vec<u32> = s.iter().map(|x| rank[x]).collect();
                    r.sort_unstable();
                    r
                })
                .collect();
            (order, rank_arrays)
        }
    };

    let root_summary = RootSummary::build(&collection);
    FsiIndex {
        collection,
        config,
        nodes: builder.nodes,
        order,
        rank_arrays,
        root_summary,
    }
}

impl Builder {
    fn compact(&self) -> bool {
        self.config.subset_mode == SubsetMode::Compact
    }

    /// Builds the subtree for `group` and returns its preorder index.
    fn node(&mut self, group: Group, depth: u32) -> u32 {
        let idx = self.nodes.len();
        let rank_lo = self.order.len() as u32;
        let cost: u64 = group.iter().map(|(_, s)| s.len() as u64).sum();
        self.nodes.push(FsiNode {
            cost,
            depth,
            subsets: NodeSubsets::Compact(0..0),
            large_ids: Vec::new(),
            matrix: BitMatrix::default(),
            remarked: None,
            left: None,
            right: None,
        });

        let is_large = |s: &Vec<Element>| (s.len() as u128).pow(2) > cost as u128;
        let has_large = group.iter().any(|(_, s)| is_large(s));
        if cost <= self.config.leaf_threshold || !has_large {
            if self.compact() {
                let mut universe: Vec<Element> =
                    group.iter().flat_map(|(_, s)| s.iter().copied()).collect();
                universe.sort_unstable();
                universe.dedup();
                self.order.extend(universe);
            }
            self.finish_leaf(idx, group, rank_lo);
            return idx as u32;
        }

        let explicit_copy = (!self.compact()).then(|| group.clone());
        let (large, small): (Group, Group) = group.into_iter().partition(|(_, s)| is_large(s));
        let large_ids: Vec<u32> = large.iter().map(|(id, _)| *id).collect();

        // Propagated elements with their multiplicities, ascending.
        let mut tagged: Vec<(Element, u32)> = large
            .iter()
            .enumerate()
            .flat_map(|(k, (_, s))| s.iter().map(move |&x| (x, k as u32)))
            .collect();
        tagged.sort_unstable();
        let matrix = intersection_matrix(&tagged, large.len());
        let mut counts: Vec<(Element, u64)> = Vec::new();
        for &(x, _) in &tagged {
            match counts.last_mut() {
                Some((y, c)) if *y == x => *c += 1,
                _ => counts.push((x, 1)),
            }
        }
        drop(tagged);

        // Elements only non-large sets hold end at this node.
        let dropped: Vec<Element> = if self.compact() {
            let mut d: Vec<Element> = small.iter().flat_map(|(_, s)| s.iter().copied()).collect();
            d.sort_unstable();
            d.dedup();
            d.retain(|x| counts.binary_search_by_key(x, |&(y, _)| y).is_err());
            d
        } else {
            Vec::new()
        };
        drop(small);

        let remarked = greedy_cut(counts.iter().map(|&(_, c)| c), cost).map(|k| counts[k].0);
        drop(counts);

        let (left_group, right_group): (Group, Group) = match remarked {
            None => (large, Vec::new()),
            Some(e) => {
                let mut left = Vec::new();
                let mut right = Vec::new();
                for (id, mut s) in large {
                    let cut = s.partition_point(|&x| x < e);
                    let skip = usize::from(s.get(cut) == Some(&e));
                    let tail = s.split_off(cut + skip);
                    s.truncate(cut);
                    if !s.is_empty() {
                        left.push((id, s));
                    }
                    if !tail.is_empty() {
                        right.push((id, tail));
                    }
                }
                (left, right)
            }
        };

        let left = (!left_group.is_empty()).then(|| self.node(left_group, depth + 1));
        let right = (!right_group.is_empty()).then(|| self.node(right_group, depth + 1));
        if self.compact() {
            self.order.extend(remarked);
            self.order.extend(dropped);
        }

        let rank_hi = self.order.len() as u32;
        let node = &mut self.nodes[idx];
        node.subsets = match explicit_copy {
            Some(g) => NodeSubsets::Explicit(g),
            None => NodeSubsets::Compact(rank_lo..rank_hi),
        };
        node.large_ids = large_ids;
        node.matrix = matrix;
        node.remarked = remarked;
        node.left = left;
        node.right = right;
        idx as u32
    }

    fn finish_leaf(&mut self, idx: usize, group: Group, rank_lo: u32) {
        let rank_hi = self.order.len() as u32;
        self.nodes[idx].subsets = if self.compact() {
            NodeSubsets::Compact(rank_lo..rank_hi)
        } else {
            NodeSubsets::Explicit(group)
        };
    }
}

/// Pairwise "do these subsets meet" matrix from `(element, local set)` pairs
/// sorted by element. Elements shared by few sets mark pairs directly; widely
/// shared ones OR a membership mask into each member's row.
fn intersection_matrix(tagged: &[(Element, u32)], l: usize) -> BitMatrix {
    let stride = l.div_ceil(64);
    let mut rows = vec![0u64; l * stride];
    let mut mask = vec![0u64; stride];
    let mut start = 0;
    while start < tagged.len() {
        let x = tagged[start].0;
        let end = start + tagged[start..].partition_point(|&(y, _)| y == x);
        let members = &tagged[start..end];
        if members.len() * members.len() <= members.len() * stride * 4 {
            for &(_, a) in members {
                for &(_, b) in members {
                    let (a, b) = (a as usize, b as usize);
                    rows[a * stride + b / 64] |= 1 << (b % 64);
                }
            }
        } else {
            mask.iter_mut().for_each(|w| *w = 0);
            for &(_, b) in members {
                mask[b as usize / 64] |= 1 << (b % 64);
            }
            for &(_, a) in members {
                let row = &mut rows[a as usize * stride..(a as usize + 1) * stride];
                row.iter_mut().zip(&mask).for_each(|(r, m)| *r |= m);
            }
        }
        start = end;
    }

    let mut matrix = BitMatrix::new(l);
    for a in 0..l {
        for (w, &word) in rows[a * stride..(a + 1) * stride].iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = w * 64 + bits.trailing_zeros() as usize;
                matrix.set(a, b);
                bits &= bits - 1;
            }
        }
    }
    matrix
}
