//! Fast set intersection index.
//!
//! The index is an unbalanced binary tree. Every node handles a subset of
//! some of the original sets; its cost `n` is the sum of those subset sizes
//! and the root costs `N`. A subset is *large* at a node when its size
//! exceeds `√n`, so a node has fewer than `√n` large sets and the bit matrix
//! recording which pairs of large subsets meet costs fewer than `n` bits.
//! Only large subsets move down: their elements are split greedily (ascending
//! element order) so that each child costs at most `n/2`, and the one element
//! that would overflow the left child stays behind as the node's *remarked*
//! element.
//!
//! A query walks down from the root while both node subsets are large and the
//! matrix says they meet. The first node where the smaller subset is not
//! large is a *stopper*: its elements are probed against the other set's
//! hash table and the walk stops there.
//!
//! Node subsets are stored either explicitly (one element array per handled
//! set per node) or compactly: elements get a global rank such that every
//! node's universe is a contiguous rank range, and each set keeps a single
//! rank-sorted array from which any node subset is a slice.

mod build;
pub(crate) mod persist;
mod validate;

use std::ops::{Add, AddAssign, Range};

pub use build::{split_node, Split};
pub use validate::ValidateOptions;

use crate::bitmatrix::BitMatrix;
use crate::error::Result;
use crate::set_store::{Element, SetCollection, SetId};

/// How node subsets are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubsetMode {
    /// Element arrays per node; `O(N · depth)` words.
    Explicit,
    /// One rank array per set plus a rank → element table; `O(N)` words.
    #[default]
    Compact,
}

impl std::str::FromStr for SubsetMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "explicit" => Ok(SubsetMode::Explicit),
            "compact" => Ok(SubsetMode::Compact),
            other => Err(format!("unknown subset mode {other:?} (explicit|compact)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildConfig {
    /// Nodes costing at most this much are leaves. Must be at least 1.
    pub leaf_threshold: u64,
    pub subset_mode: SubsetMode,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            leaf_threshold: 4,
            subset_mode: SubsetMode::Compact,
        }
    }
}

impl BuildConfig {
    pub fn with_mode(mut self, mode: SubsetMode) -> Self {
        self.subset_mode = mode;
        self
    }

    pub fn with_leaf_threshold(mut self, leaf_threshold: u64) -> Self {
        self.leaf_threshold = leaf_threshold;
        self
    }
}

/// Work performed by one query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkCounters {
    pub hash_probes: u64,
    pub matrix_lookups: u64,
    pub nodes_visited: u64,
    pub stopper_elements_scanned: u64,
}

impl Add for WorkCounters {
    type Output = WorkCounters;

    fn add(mut self, rhs: WorkCounters) -> WorkCounters {
        self += rhs;
        self
    }
}

impl AddAssign for WorkCounters {
    fn add_assign(&mut self, rhs: WorkCounters) {
        self.hash_probes += rhs.hash_probes;
        self.matrix_lookups += rhs.matrix_lookups;
        self.nodes_visited += rhs.nodes_visited;
        self.stopper_elements_scanned += rhs.stopper_elements_scanned;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum NodeSubsets {
    /// `(set id, ascending elements)`, sorted by set id, no empty subsets.
    Explicit(Vec<(u32, Vec<Element>)>),
    /// Rank range holding exactly this node's universe.
    Compact(Range<u32>),
}

/// One tree node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FsiNode {
    pub(crate) cost: u64,
    pub(crate) depth: u32,
    pub(crate) subsets: NodeSubsets,
    /// Ascending ids of the large sets; empty at leaves.
    pub(crate) large_ids: Vec<u32>,
    pub(crate) matrix: BitMatrix,
    pub(crate) remarked: Option<Element>,
    pub(crate) left: Option<u32>,
    pub(crate) right: Option<u32>,
}

impl FsiNode {
    /// Sum of the sizes of the subsets this node handles.
    pub fn cost(&self) -> u64 {
        self.cost
    }

    /// Root is depth 0.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn large_ids(&self) -> &[u32] {
        &self.large_ids
    }

    /// Intersection bit matrix over `large_ids`.
    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn remarked(&self) -> Option<Element> {
        self.remarked
    }

    pub fn left(&self) -> Option<usize> {
        self.left.map(|c| c as usize)
    }

    pub fn right(&self) -> Option<usize> {
        self.right.map(|c| c as usize)
    }

    pub fn is_leaf(&self) -> bool {
        self.large_ids.is_empty()
    }

    fn local_id(&self, set: SetId) -> Option<usize> {
        self.large_ids.binary_search(&(set as u32)).ok()
    }

    /// `size > √cost`, without floating point.
    #[inline]
    fn is_large_size(&self, size: usize) -> bool {
        (size as u128) * (size as u128) > self.cost as u128
    }
}

/// Root-level structure answering emptiness and size queries: the root's
/// large sets and the exact intersection size of every large pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSummary {
    cost: u64,
    large_ids: Vec<u32>,
    sizes: Vec<u64>,
}

impl RootSummary {
    /// Counts large-pair intersections through the element → sets tables.
    pub fn build(col: &SetCollection) -> Self {
        let cost = col.total_size() as u64;
        let large_ids: Vec<u32> = col
            .sets()
            .iter()
            .enumerate()
            .filter(|(_, s)| (s.len() as u128).pow(2) > cost as u128)
            .map(|(id, _)| id as u32)
            .collect();
        let l = large_ids.len();
        let mut sizes = vec![0u64; l * l];
        if l > 0 {
            let mut local = vec![u32::MAX; col.len()];
            for (k, &id) in large_ids.iter().enumerate() {
                local[id as usize] = k as u32;
            }
            let mut members = Vec::new();
            for (_, owners) in col.element_owners() {
                members.clear();
                members.extend(
                    owners
                        .iter()
                        .map(|&s| local[s as usize])
                        .filter(|&k| k != u32::MAX)
                        .map(|k| k as usize),
                );
                for (p, &a) in members.iter().enumerate() {
                    sizes[a * l + a] += 1;
                    for &b in &members[p + 1..] {
                        sizes[a * l + b] += 1;
                        sizes[b * l + a] += 1;
                    }
                }
            }
        }
        RootSummary {
            cost,
            large_ids,
            sizes,
        }
    }

    pub fn large_ids(&self) -> &[u32] {
        &self.large_ids
    }

    fn is_large(&self, size: usize) -> bool {
        (size as u128) * (size as u128) > self.cost as u128
    }

    fn pair(&self, col: &SetCollection, i: SetId, j: SetId) -> Result<(SetId, SetId, Option<u64>)> {
        let (a, b) = (col.set(i)?, col.set(j)?);
        let (small, other) = if a.len() <= b.len() { (i, j) } else { (j, i) };
        if !self.is_large(col.sets()[small].len()) {
            return Ok((small, other, None));
        }
        let l = self.large_ids.len();
        let local = |s: SetId| {
            self.large_ids
                .binary_search(&(s as u32))
                .expect("set larger than a large set is large")
        };
        Ok((
            small,
            other,
            Some(self.sizes[local(small) * l + local(other)]),
        ))
    }

    /// `true` iff sets `i` and `j` share no element.
    pub fn intersection_empty(&self, col: &SetCollection, i: SetId, j: SetId) -> Result<bool> {
        Ok(match self.pair(col, i, j)? {
            (_, _, Some(size)) => size == 0,
            (small, other, None) => !col.sets()[small].iter().any(|&x| col.contains(other, x)),
        })
    }

    /// `|set i ∩ set j|`.
    pub fn intersection_size(&self, col: &SetCollection, i: SetId, j: SetId) -> Result<u64> {
        Ok(match self.pair(col, i, j)? {
            (_, _, Some(size)) => size,
            (small, other, None) => col.sets()[small]
                .iter()
                .filter(|&&x| col.contains(other, x))
                .count() as u64,
        })
    }
}

/// The tree index together with the collection it was built over.
#[derive(Debug, Clone)]
pub struct FsiIndex {
    collection: SetCollection,
    config: BuildConfig,
    /// Preorder; node 0 is the root.
    nodes: Vec<FsiNode>,
    /// Compact mode: rank → element.
    order: Vec<Element>,
    /// Compact mode: each set's elements as ascending ranks.
    rank_arrays: Vec<Vec<u32>>,
    root_summary: RootSummary,
}

enum SubsetRef<'a> {
    Elements(&'a [Element]),
    Ranks(&'a [u32], &'a [Element]),
}

impl SubsetRef<'_> {
    fn len(&self) -> usize {
        match self {
            SubsetRef::Elements(e) => e.len(),
            SubsetRef::Ranks(r, _) => r.len(),
        }
    }

    fn for_each(&self, mut f: impl FnMut(Element)) {
        match self {
            SubsetRef::Elements(e) => e.iter().for_each(|&x| f(x)),
            SubsetRef::Ranks(r, order) => r.iter().for_each(|&k| f(order[k as usize])),
        }
    }
}

/// Space usage of a built index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexStats {
    pub total_size: u64,
    pub node_count: usize,
    /// Number of levels (a lone root has depth 1).
    pub depth: usize,
    /// Sum of `|large_ids|²` over all nodes.
    pub total_matrix_bits: u64,
    pub matrix_bits_per_depth: Vec<u64>,
    /// Compact mode: entries over all per-set rank arrays.
    pub rank_entries: u64,
    /// Explicit mode: element entries over all node subsets.
    pub explicit_entries: u64,
}

impl FsiIndex {
    /// Builds the tree over `collection`.
    pub fn build(collection: SetCollection, config: BuildConfig) -> Self {
        build::build(collection, config)
    }

    pub fn collection(&self) -> &SetCollection {
        &self.collection
    }

    pub fn config(&self) -> BuildConfig {
        self.config
    }

    pub fn nodes(&self) -> &[FsiNode] {
        &self.nodes
    }

    pub fn root(&self) -> &FsiNode {
        &self.nodes[0]
    }

    pub fn root_summary(&self) -> &RootSummary {
        &self.root_summary
    }

    /// Rank arrays of the compact representation (empty in explicit mode).
    pub fn rank_arrays(&self) -> &[Vec<u32>] {
        &self.rank_arrays
    }

    fn subset<'a>(&'a self, node: &'a FsiNode, set: SetId) -> SubsetRef<'a> {
        match &node.subsets {
            NodeSubsets::Explicit(handled) => {
                match handled.binary_search_by_key(&(set as u32), |(id, _)| *id) {
                    Ok(k) => SubsetRef::Elements(&handled[k].1),
                    Err(_) => SubsetRef::Elements(&[]),
                }
            }
            NodeSubsets::Compact(range) => {
                let ranks = &self.rank_arrays[set];
                let lo = ranks.partition_point(|&r| r < range.start);
                let hi = lo + ranks[lo..].partition_point(|&r| r < range.end);
                SubsetRef::Ranks(&ranks[lo..hi], &self.order)
            }
        }
    }

    /// Ascending elements of `set` at node `node`. Only meaningful for sets
    /// the node handles.
    pub fn node_subset(&self, node: usize, set: SetId) -> Vec<Element> {
        let mut out = Vec::new();
        self.subset(&self.nodes[node], set)
            .for_each(|x| out.push(x));
        out.sort_unstable();
        out
    }

    /// Ascending `set i ∩ set j` and the work spent computing it.
    pub fn intersect(&self, i: SetId, j: SetId) -> Result<(Vec<Element>, WorkCounters)> {
        self.collection.check(i)?;
        self.collection.check(j)?;
        let mut out = Vec::new();
        let mut work = WorkCounters::default();
        self.visit(0, i, j, &mut out, &mut work);
        out.sort_unstable();
        Ok((out, work))
    }

    fn visit(
        &self,
        idx: usize,
        i: SetId,
        j: SetId,
        out: &mut Vec<Element>,
        work: &mut WorkCounters,
    ) {
        let node = &self.nodes[idx];
        work.nodes_visited += 1;
        let (a, b) = (self.subset(node, i), self.subset(node, j));
        if a.len() == 0 || b.len() == 0 {
            return;
        }
        let (small, other, small_id) = if a.len() <= b.len() {
            (a, j, i)
        } else {
            (b, i, j)
        };

        if node.is_leaf() || !node.is_large_size(small.len()) {
            work.stopper_elements_scanned += small.len() as u64;
            work.hash_probes += small.len() as u64;
            small.for_each(|x| {
                if self.collection.contains(other, x) {
                    out.push(x);
                }
            });
            return;
        }

        // Both subsets are large here.
        let (la, lb) = match (node.local_id(small_id), node.local_id(other)) {
            (Some(la), Some(lb)) => (la, lb),
            _ => unreachable!("large subset missing from the node registry"),
        };
        work.matrix_lookups += 1;
        if !node.matrix.get(la, lb) {
            return;
        }
        if let Some(e) = node.remarked {
            work.hash_probes += 1;
            if self.collection.contains(i, e) {
                work.hash_probes += 1;
                if self.collection.contains(j, e) {
                    out.push(e);
                }
            }
        }
        if let Some(left) = node.left {
            self.visit(left as usize, i, j, out, work);
        }
        if let Some(right) = node.right {
            self.visit(right as usize, i, j, out, work);
        }
    }

    /// Root-only emptiness test.
    pub fn intersection_empty(&self, i: SetId, j: SetId) -> Result<bool> {
        self.root_summary.intersection_empty(&self.collection, i, j)
    }

    /// Root-only intersection size.
    pub fn intersection_size(&self, i: SetId, j: SetId) -> Result<u64> {
        self.root_summary.intersection_size(&self.collection, i, j)
    }

    pub fn stats(&self) -> IndexStats {
        let depth = self
            .nodes
            .iter()
            .map(|n| n.depth as usize + 1)
            .max()
            .unwrap_or(0);
        let mut per_depth = vec![0u64; depth];
        let mut explicit_entries = 0;
        for node in &self.nodes {
            per_depth[node.depth as usize] += node.matrix.bits() as u64;
            if let NodeSubsets::Explicit(h) = &node.subsets {
                explicit_entries += h.iter().map(|(_, s)| s.len() as u64).sum::<u64>();
            }
        }
        IndexStats {
            total_size: self.collection.total_size() as u64,
            node_count: self.nodes.len(),
            depth,
            total_matrix_bits: per_depth.iter().sum(),
            matrix_bits_per_depth: per_depth,
            rank_entries: self.rank_arrays.iter().map(|r| r.len() as u64).sum(),
            explicit_entries,
        }
    }
}
