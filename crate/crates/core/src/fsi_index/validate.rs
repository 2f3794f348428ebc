use std::collections::HashSet;

use super::{FsiIndex, NodeSubsets, SubsetMode};
use crate::error::{Error, Result};
use crate::set_store::Element;

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    /// Brute-force the matrix only at nodes with at most this many large sets.
    pub matrix_check_limit: Option<usize>,
}

fn fail<T>(msg: String) -> Result<T> {
    Err(Error::Internal(msg))
}

fn meet(a: &[Element], b: &[Element]) -> bool {
    let (mut p, mut q) = (0, 0);
    while p < a.len() && q < b.len() {
        match a[p].cmp(&b[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

impl FsiIndex {
    /// Walks the tree and checks every structural invariant.
    pub fn validate(&self, opts: &ValidateOptions) -> Result<()> {
        let n_total = self.collection.total_size() as u64;
        if self.root().cost != n_total {
            return fail(format!("root cost {} != N {}", self.root().cost, n_total));
        }

        let stats = self.stats();
        // ceil(log2(N / leaf_threshold)) + 1, at least 1.
        let t = self.config.leaf_threshold.max(1) as u128;
        let mut bound = 1usize;
        while n_total as u128 > t << (bound - 1) {
            bound += 1;
        }
        if stats.depth > bound {
            return fail(format!("depth {} exceeds bound {bound}", stats.depth));
        }
        for (d, &bits) in stats.matrix_bits_per_depth.iter().enumerate() {
            if bits > n_total {
                return fail(format!("depth {d}: {bits} matrix bits > N"));
            }
        }

        if self.config.subset_mode == SubsetMode::Compact {
            let entries = stats.rank_entries;
            if entries != n_total {
                return fail(format!("{entries} rank entries for N = {n_total}"));
            }
            let distinct: HashSet<Element> = self.order.iter().copied().collect();
            if distinct.len() != self.order.len()
                || self.order.len() != self.collection.distinct_elements()
            {
                return fail("rank order is not a permutation of the elements".into());
            }
        }

        let root_handled: Vec<u32> = (0..self.collection.len() as u32).collect();
        self.check_node(0, &root_handled, opts)
    }

    fn check_node(&self, idx: usize, handled: &[u32], opts: &ValidateOptions) -> Result<()> {
        let node = &self.nodes[idx];
        let subset = |set: u32| self.node_subset(idx, set as usize);

        if let NodeSubsets::Explicit(h) = &node.subsets {
            for (id, s) in h {
                if handled.binary_search(id).is_err() {
                    return fail(format!("node {idx} handles set {id} its parent dropped"));
                }
                if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) {
                    return fail(format!("node {idx}: subset of set {id} malformed"));
                }
            }
        }

        let sizes: Vec<(u32, usize)> = handled.iter().map(|&s| (s, subset(s).len())).collect();
        let cost: u64 = sizes.iter().map(|&(_, n)| n as u64).sum();
        if cost != node.cost {
            return fail(format!("node {idx}: stored cost {} != {cost}", node.cost));
        }

        let l = node.large_ids.len();
        if (l as u64) * (l as u64) > node.cost {
            return fail(format!(
                "node {idx}: {l} large sets exceed sqrt({})",
                node.cost
            ));
        }
        if node.is_leaf() {
            if node.left.is_some() || node.right.is_some() || node.remarked.is_some() {
                return fail(format!("leaf {idx} has children or a remarked element"));
            }
            return Ok(());
        }

        let expected_large: Vec<u32> = sizes
            .iter()
            .filter(|&&(_, n)| node.is_large_size(n))
            .map(|&(s, _)| s)
            .collect();
        if expected_large != node.large_ids {
            return fail(format!("node {idx}: large registry mismatch"));
        }

        let m = &node.matrix;
        if m.dim() != l || !m.is_symmetric() || !(0..l).all(|a| m.get(a, a)) {
            return fail(format!(
                "node {idx}: matrix shape, symmetry or diagonal wrong"
            ));
        }
        let large_subsets: Vec<Vec<Element>> = node.large_ids.iter().map(|&s| subset(s)).collect();
        if opts.matrix_check_limit.is_none_or(|lim| l <= lim) {
            for a in 0..l {
                for b in a + 1..l {
                    if m.get(a, b) != meet(&large_subsets[a], &large_subsets[b]) {
                        return fail(format!("node {idx}: matrix bit ({a},{b}) unsound"));
                    }
                }
            }
        }

        let half = node.cost.div_ceil(2);
        for child in [node.left, node.right].into_iter().flatten() {
            let c = &self.nodes[child as usize];
            if c.cost > half {
                return fail(format!(
                    "node {idx}: child cost {} > ceil(n/2) = {half}",
                    c.cost
                ));
            }
            if c.depth != node.depth + 1 {
                return fail(format!("node {idx}: child depth {}", c.depth));
            }
        }

        // Child universes must be disjoint.
        let universe = |child: Option<u32>| -> HashSet<Element> {
            child.map_or_else(HashSet::new, |c| {
                node.large_ids
                    .iter()
                    .flat_map(|&s| self.node_subset(c as usize, s as usize))
                    .collect()
            })
        };
        if let (NodeSubsets::Compact(r), Some(lc), Some(rc)) =
            (&node.subsets, node.left, node.right)
        {
            let (lr, rr) = match (
                &self.nodes[lc as usize].subsets,
                &self.nodes[rc as usize].subsets,
            ) {
                (NodeSubsets::Compact(a), NodeSubsets::Compact(b)) => (a.clone(), b.clone()),
                _ => return fail(format!("node {idx}: mixed subset modes")),
            };
            if lr.end > rr.start || lr.start < r.start || rr.end > r.end {
                return fail(format!(
                    "node {idx}: child rank ranges not nested and disjoint"
                ));
            }
        }
        let (left_u, right_u) = (universe(node.left), universe(node.right));
        if left_u.iter().any(|x| right_u.contains(x)) {
            return fail(format!("node {idx}: child universes overlap"));
        }
        if let Some(e) = node.remarked {
            if left_u.contains(&e) || right_u.contains(&e) {
                return fail(format!("node {idx}: remarked element {e} reached a child"));
            }
        }

        // Partition completeness for every large set.
        for (k, &s) in node.large_ids.iter().enumerate() {
            let mut parts: Vec<Element> = Vec::new();
            for child in [node.left, node.right].into_iter().flatten() {
                parts.extend(self.node_subset(child as usize, s as usize));
            }
            if let Some(e) = node.remarked {
                if large_subsets[k].binary_search(&e).is_ok() {
                    parts.push(e);
                }
            }
            parts.sort_unstable();
            if parts != large_subsets[k] {
                return fail(format!(
                    "node {idx}: set {s} not partitioned between children"
                ));
            }
        }

        for child in [node.left, node.right].into_iter().flatten() {
            self.check_node(child as usize, &node.large_ids, opts)?;
        }
        Ok(())
    }
}
