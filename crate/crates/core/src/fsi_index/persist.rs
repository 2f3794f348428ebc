//! `FSI1` binary container. All integers little-endian.
//!
//! ```text
//! magic            4 bytes  "FSI1"
//! version          u32      1
//! leaf_threshold   u64
//! subset_mode      u8       0 = explicit, 1 = compact
//! set_count        u64
//!   per set:       u64 len, then len × u64 elements (ascending)
//! compact only:
//!   order_len      u64, then order_len × u64 (rank → element)
//!   per set:       u64 len, then len × u32 ranks (ascending)
//! root summary:    u64 L, L × u32 large ids, L·L × u64 pair sizes
//! node_count       u64
//!   per node, preorder:
//!     cost u64, depth u32, left u32, right u32 (u32::MAX = none),
//!     has_remarked u8, remarked u64 (0 when absent),
//!     explicit: u64 k, then k × (u32 set id, u64 len, len × u64 elements)
//!     compact:  u32 rank_lo, u32 rank_hi
//!     u64 L, L × u32 large ids, u64 W, W × u64 matrix words
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::{BuildConfig, FsiIndex, FsiNode, NodeSubsets, RootSummary, SubsetMode};
use crate::bitmatrix::BitMatrix;
use crate::error::{Error, Result};
use crate::set_store::SetCollection;

const MAGIC: &[u8; 4] = b"FSI1";
const VERSION: u32 = 1;
const NONE: u32 = u32::MAX;

pub(crate) fn write_u64s<W: Write>(w: &mut W, xs: &[u64]) -> std::io::Result<()> {
    w.write_u64::<LE>(xs.len() as u64)?;
    xs.iter().try_for_each(|&x| w.write_u64::<LE>(x))
}

pub(crate) fn write_u32s<W: Write>(w: &mut W, xs: &[u32]) -> std::io::Result<()> {
    w.write_u64::<LE>(xs.len() as u64)?;
    xs.iter().try_for_each(|&x| w.write_u32::<LE>(x))
}

/// Length prefix, refusing values that cannot fit in the remaining input.
pub(crate) fn read_len<R: Read>(r: &mut R, elem_bytes: u64) -> Result<usize> {
    let n = r.read_u64::<LE>()?;
    // 1 GiB of elements per array is far beyond any index this crate builds.
    if n.saturating_mul(elem_bytes.max(1)) > 1 << 40 {
        return Err(Error::Format(format!("implausible array length {n}")));
    }
    Ok(n as usize)
}

pub(crate) fn read_u64s<R: Read>(r: &mut R) -> Result<Vec<u64>> {
    let n = read_len(r, 8)?;
    (0..n).map(|_| Ok(r.read_u64::<LE>()?)).collect()
}

pub(crate) fn read_u32s<R: Read>(r: &mut R) -> Result<Vec<u32>> {
    let n = read_len(r, 4)?;
    (0..n).map(|_| Ok(r.read_u32::<LE>()?)).collect()
}

fn opt(x: Option<u32>) -> u32 {
    x.unwrap_or(NONE)
}

fn unopt(x: u32) -> Option<u32> {
    (x != NONE).then_some(x)
}

impl FsiIndex {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LE>(VERSION)?;
        w.write_u64::<LE>(self.config.leaf_threshold)?;
        w.write_u8(match self.config.subset_mode {
            SubsetMode::Explicit => 0,
            SubsetMode::Compact => 1,
        })?;

        w.write_u64::<LE>(self.collection.len() as u64)?;
        for set in self.collection.sets() {
            write_u64s(w, set)?;
        }
        if self.config.subset_mode == SubsetMode::Compact {
            write_u64s(w, &self.order)?;
            for ranks in &self.rank_arrays {
                write_u32s(w, ranks)?;
            }
        }

        write_u32s(w, &self.root_summary.large_ids)?;
        for &s in &self.root_summary.sizes {
            w.write_u64::<LE>(s)?;
        }

        w.write_u64::<LE>(self.nodes.len() as u64)?;
        for node in &self.nodes {
            w.write_u64::<LE>(node.cost)?;
            w.write_u32::<LE>(node.depth)?;
            w.write_u32::<LE>(opt(node.left))?;
            w.write_u32::<LE>(opt(node.right))?;
            w.write_u8(node.remarked.is_some() as u8)?;
            w.write_u64::<LE>(node.remarked.unwrap_or(0))?;
            match &node.subsets {
                NodeSubsets::Explicit(handled) => {
                    w.write_u64::<LE>(handled.len() as u64)?;
                    for (id, s) in handled {
                        w.write_u32::<LE>(*id)?;
                        write_u64s(w, s)?;
                    }
                }
                NodeSubsets::Compact(range) => {
                    w.write_u32::<LE>(range.start)?;
                    w.write_u32::<LE>(range.end)?;
                }
            }
            write_u32s(w, &node.large_ids)?;
            write_u64s(w, node.matrix.words())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic, expected FSI1".into()));
        }
        let version = r.read_u32::<LE>()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let leaf_threshold = r.read_u64::<LE>()?;
        let subset_mode = match r.read_u8()? {
            0 => SubsetMode::Explicit,
            1 => SubsetMode::Compact,
            other => return Err(Error::Format(format!("unknown subset mode {other}"))),
        };
        if leaf_threshold == 0 {
            return Err(Error::Format("leaf threshold 0".into()));
        }

        let m = read_len(r, 8)?;
        let mut sets = Vec::with_capacity(m);
        for _ in 0..m {
            let s = read_u64s(r)?;
            if s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Format("set elements not strictly ascending".into()));
            }
            sets.push(s);
        }
        let collection = SetCollection::from_sorted_unchecked(sets);

        let (order, rank_arrays) = if subset_mode == SubsetMode::Compact {
            let order = read_u64s(r)?;
            let ranks = (0..m).map(|_| read_u32s(r)).collect::<Result<Vec<_>>>()?;
            if ranks.iter().flatten().any(|&k| k as usize >= order.len()) {
                return Err(Error::Format("rank outside the element order".into()));
            }
            (order, ranks)
        } else {
            (Vec::new(), Vec::new())
        };

        let large_ids = read_u32s(r)?;
        let l = large_ids.len();
        let sizes = (0..l * l)
            .map(|_| Ok(r.read_u64::<LE>()?))
            .collect::<Result<Vec<_>>>()?;
        let root_summary = RootSummary {
            cost: collection.total_size() as u64,
            large_ids,
            sizes,
        };

        let count = read_len(r, 32)?;
        let mut nodes = Vec::with_capacity(count);
        for _ in 0..count {
            let cost = r.read_u64::<LE>()?;
            let depth = r.read_u32::<LE>()?;
            let left = unopt(r.read_u32::<LE>()?);
            let right = unopt(r.read_u32::<LE>()?);
            let has_remarked = r.read_u8()? != 0;
            let remarked = r.read_u64::<LE>()?;
            let subsets = match subset_mode {
                SubsetMode::Explicit => {
                    let k = read_len(r, 12)?;
                    let mut handled = Vec::with_capacity(k);
                    for _ in 0..k {
                        let id = r.read_u32::<LE>()?;
                        if id as usize >= m {
                            return Err(Error::Format(format!("handled set id {id} out of range")));
                        }
                        handled.push((id, read_u64s(r)?));
                    }
                    NodeSubsets::Explicit(handled)
                }
                SubsetMode::Compact => {
                    let lo = r.read_u32::<LE>()?;
                    let hi = r.read_u32::<LE>()?;
                    NodeSubsets::Compact(lo..hi)
                }
            };
            let large_ids = read_u32s(r)?;
            let words = read_u64s(r)?;
            let matrix = BitMatrix::from_words(large_ids.len(), words).ok_or_else(|| {
                Error::Format("matrix size does not match large set count".into())
            })?;
            if large_ids.iter().any(|&s| s as usize >= m) {
                return Err(Error::Format("large set id out of range".into()));
            }
            nodes.push(FsiNode {
                cost,
                depth,
                subsets,
                large_ids,
                matrix,
                remarked: has_remarked.then_some(remarked),
                left,
                right,
            });
        }
        if nodes.is_empty() {
            return Err(Error::Format("index has no root node".into()));
        }
        // Children must come later in preorder; this also rules out cycles.
        for (k, n) in nodes.iter().enumerate() {
            for c in [n.left, n.right].into_iter().flatten() {
                if c as usize <= k || c as usize >= nodes.len() {
                    return Err(Error::Format(format!("node {k} has invalid child {c}")));
                }
            }
        }
        if root_summary.large_ids.iter().any(|&s| s as usize >= m) {
            return Err(Error::Format("large set id out of range".into()));
        }

        Ok(FsiIndex {
            collection,
            config: BuildConfig {
                leaf_threshold,
                subset_mode,
            },
            nodes,
            order,
            rank_arrays,
            root_summary,
        })
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        let idx = Self::read_from(&mut bytes)?;
        if !bytes.is_empty() {
            return Err(Error::Format(format!("{} trailing bytes", bytes.len())));
        }
        Ok(idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SetCollection {
        SetCollection::from_sets(
            vec![
                vec![1, 2, 3, 4, 10, 11],
                vec![3, 4, 5, 10],
                vec![6],
                vec![],
                vec![1, 5, 11],
            ],
            false,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        for mode in [SubsetMode::Explicit, SubsetMode::Compact] {
            let cfg = BuildConfig::default()
                .with_mode(mode)
                .with_leaf_threshold(1);
            let idx = FsiIndex::build(sample(), cfg);
            let bytes = idx.to_bytes();
            assert_eq!(&bytes[..4], b"FSI1");
            let back = FsiIndex::from_bytes(&bytes).unwrap();
            assert_eq!(back.to_bytes(), bytes);
            assert_eq!(back.nodes(), idx.nodes());
            for i in 0..5 {
                for j in 0..5 {
                    assert_eq!(back.intersect(i, j).unwrap(), idx.intersect(i, j).unwrap());
                }
            }
        }
    }

    #[test]
    fn rejects_corrupt_input() {
        let bytes = FsiIndex::build(sample(), BuildConfig::default()).to_bytes();
        assert!(matches!(
            FsiIndex::from_bytes(b"NOPE"),
            Err(Error::Format(_))
        ));
        assert!(FsiIndex::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(
            FsiIndex::from_bytes(&extra),
            Err(Error::Format(_))
        ));
        let mut bad_version = bytes;
        bad_version[4] = 9;
        assert!(matches!(
            FsiIndex::from_bytes(&bad_version),
            Err(Error::Format(_))
        ));
    }
}
