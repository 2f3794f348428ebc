//! Common colors queries: given two disjoint intervals of a color array,
//! list the distinct colors present in both.
//!
//! The array is conceptually padded to a power of two `P`. Level `ℓ` splits
//! it into `2^ℓ` aligned blocks of `P / 2^ℓ` positions; each block owns the
//! set of distinct colors in its (unpadded) positions. Any interval is the
//! disjoint union of at most `2⌈log₂N⌉` blocks, and a query intersects every
//! block of the first cover with every block of the second using the
//! [`FsiIndex`] built over all blocks.

use std::io::{Read, Write};
use std::str::FromStr;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::fsi_index::persist::{read_u32s, read_u64s, write_u32s, write_u64s};
use crate::fsi_index::{BuildConfig, FsiIndex, WorkCounters};
use crate::set_store::SetCollection;

/// 1-indexed inclusive position interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> usize {
        (self.hi + 1).saturating_sub(self.lo)
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    /// Errors unless `1 ≤ lo ≤ hi ≤ len`.
    pub fn check(&self, len: usize) -> Result<()> {
        if self.lo >= 1 && self.lo <= self.hi && self.hi <= len {
            Ok(())
        } else {
            Err(Error::Range {
                lo: self.lo,
                hi: self.hi,
                len,
            })
        }
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl FromStr for Interval {
    type Err = String;

    /// Parses `l:r`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (l, r) = s
            .split_once(':')
            .ok_or_else(|| format!("expected l:r, got {s:?}"))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid bound {x:?} in {s:?}"))
        };
        Ok(Interval::new(parse(l)?, parse(r)?))
    }
}

/// Parses a color array file: one base-10 color per line.
pub fn parse_colors(text: &str) -> Result<Vec<u64>> {
    text.lines()
        .enumerate()
        .map(|(n, line)| {
            line.parse().map_err(|_| Error::Parse {
                line: n + 1,
                message: format!("invalid color {line:?}"),
            })
        })
        .collect()
}

/// One dyadic block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalNode {
    pub level: u32,
    pub index: usize,
}

impl CanonicalNode {
    /// Heap order: root 0, then level by level.
    pub fn set_id(&self) -> usize {
        (1usize << self.level) - 1 + self.index
    }
}

/// Reusable deduplication state: one stamp per palette entry, reset by
/// bumping the epoch.
#[derive(Debug, Clone, Default)]
pub struct CcqScratch {
    stamp: Vec<u32>,
    epoch: u32,
}

impl CcqScratch {
    fn begin(&mut self, colors: usize) {
        if self.stamp.len() < colors {
            self.stamp.resize(colors, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    /// `true` the first time `code` is seen in the current epoch.
    fn first_sight(&mut self, code: usize) -> bool {
        let fresh = self.stamp[code] != self.epoch;
        self.stamp[code] = self.epoch;
        fresh
    }
}

#[derive(Debug, Clone)]
pub struct CcqIndex {
    /// Color codes per position (indices into `palette`).
    codes: Vec<u32>,
    /// Distinct colors, ascending.
    palette: Vec<u64>,
    /// `log₂ P` where `P` is the padded length.
    height: u32,
    fsi: FsiIndex,
}

impl CcqIndex {
    pub fn build(colors: &[u64]) -> Result<Self> {
        Self::build_with(colors, BuildConfig::default())
    }

    pub fn build_with(colors: &[u64], config: BuildConfig) -> Result<Self> {
        if colors.is_empty() {
            return Err(Error::EmptyArray);
        }
        let mut palette = colors.to_vec();
        palette.sort_unstable();
        palette.dedup();
        let codes: Vec<u32> = colors
            .iter()
            .map(|c| palette.binary_search(c).expect("color in palette") as u32)
            .collect();
        let height = colors.len().next_power_of_two().trailing_zeros();
        let fsi = FsiIndex::build(canonical_sets(&codes, height), config);
        Ok(CcqIndex {
            codes,
            palette,
            height,
            fsi,
        })
    }

    /// Array length `N`.
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Number of levels, `⌈log₂N⌉ + 1`.
    pub fn levels(&self) -> u32 {
        self.height + 1
    }

    pub fn color_at(&self, pos: usize) -> u64 {
        self.palette[self.codes[pos - 1] as usize]
    }

    pub fn fsi(&self) -> &FsiIndex {
        &self.fsi
    }

    /// Positions covered by `node`, clipped to the array.
    pub fn node_range(&self, node: CanonicalNode) -> Option<Interval> {
        let width = 1usize << (self.height - node.level);
        let lo = node.index * width + 1;
        let hi = ((node.index + 1) * width).min(self.len());
        (lo <= hi).then_some(Interval::new(lo, hi))
    }

    /// Ascending distinct colors owned by `node`.
    pub fn node_colors(&self, node: CanonicalNode) -> Vec<u64> {
        self.fsi.collection().sets()[node.set_id()]
            .iter()
            .map(|&c| self.palette[c as usize])
            .collect()
    }

    /// Minimal set of blocks tiling `interval`, left to right.
    pub fn decompose(&self, interval: Interval) -> Result<Vec<CanonicalNode>> {
        interval.check(self.len())?;
        let mut out = Vec::new();
        // Positions are 0-based half-open inside the walk.
        self.cover(0, 0, interval.lo - 1, interval.hi, &mut out);
        Ok(out)
    }

    fn cover(&self, level: u32, index: usize, lo: usize, hi: usize, out: &mut Vec<CanonicalNode>) {
        let width = 1usize << (self.height - level);
        let (start, end) = (index * width, (index + 1) * width);
        if hi <= start || end <= lo {
            return;
        }
        if lo <= start && end <= hi {
            out.push(CanonicalNode { level, index });
            return;
        }
        self.cover(level + 1, 2 * index, lo, hi, out);
        self.cover(level + 1, 2 * index + 1, lo, hi, out);
    }

    /// Ascending distinct colors occurring in both `i1` and `i2`, which must
    /// be disjoint.
    pub fn common_colors(&self, i1: Interval, i2: Interval) -> Result<Vec<u64>> {
        let mut scratch = CcqScratch::default();
        self.common_colors_with(&mut scratch, i1, i2)
            .map(|(c, _)| c)
    }

    /// As [`common_colors`](Self::common_colors), reusing `scratch` and
    /// reporting the summed intersection work.
    pub fn common_colors_with(
        &self,
        scratch: &mut CcqScratch,
        i1: Interval,
        i2: Interval,
    ) -> Result<(Vec<u64>, WorkCounters)> {
        i1.check(self.len())?;
        i2.check(self.len())?;
        if i1.overlaps(&i2) {
            return Err(Error::OverlappingIntervals {
                first: (i1.lo, i1.hi),
                second: (i2.lo, i2.hi),
            });
        }
        let (first, second) = (self.decompose(i1)?, self.decompose(i2)?);
        scratch.begin(self.palette.len());
        let mut work = WorkCounters::default();
        let mut codes = Vec::new();
        for a in &first {
            for b in &second {
                let (hits, w) = self.fsi.intersect(a.set_id(), b.set_id())?;
                work += w;
                for c in hits {
                    if scratch.first_sight(c as usize) {
                        codes.push(c);
                    }
                }
            }
        }
        codes.sort_unstable();
        Ok((
            codes
                .into_iter()
                .map(|c| self.palette[c as usize])
                .collect(),
            work,
        ))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"CCQ1")?;
        write_u64s(w, &self.palette)?;
        write_u32s(w, &self.codes)?;
        w.write_u32::<LE>(self.height)?;
        self.fsi.write_to(w)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"CCQ1" {
            return Err(Error::Format("bad magic, expected CCQ1".into()));
        }
        let palette = read_u64s(r)?;
        let codes = read_u32s(r)?;
        let height = r.read_u32::<LE>()?;
        let fsi = FsiIndex::read_from(r)?;
        let consistent = !codes.is_empty()
            && codes.iter().all(|&c| (c as usize) < palette.len())
            && codes.len().next_power_of_two().trailing_zeros() == height
            && fsi.collection().len() == (2usize << height) - 1;
        if !consistent {
            return Err(Error::Format("color index sections disagree".into()));
        }
        Ok(CcqIndex {
            codes,
            palette,
            height,
            fsi,
        })
    }
}

/// All `2P - 1` block color sets, in heap order.
fn canonical_sets(codes: &[u32], height: u32) -> SetCollection {
    let padded = 1usize << height;
    let mut levels: Vec<Vec<Vec<u64>>> = Vec::with_capacity(height as usize + 1);
    let bottom: Vec<Vec<u64>> = (0..padded)
        .map(|k| codes.get(k).map(|&c| vec![c as u64]).unwrap_or_default())
        .collect();
    levels.push(bottom);
    for _ in 0..height {
        let below = levels.last().unwrap();
        let above = below
            .chunks(2)
            .map(|pair| merge_distinct(&pair[0], &pair[1]))
            .collect();
        levels.push(above);
    }
    let sets: Vec<Vec<u64>> = levels.into_iter().rev().flatten().collect();
    SetCollection::from_sorted_unchecked(sets)
}

fn merge_distinct(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        out.push(x);
        i += usize::from(a[i] == x);
        j += usize::from(b[j] == x);
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::naive_common_colors;

    fn node(level: u32, index: usize) -> CanonicalNode {
        CanonicalNode { level, index }
    }

    #[test]
    fn canonical_sets_of_small_array() {
        let idx = CcqIndex::build(&[1, 2, 1, 3]).unwrap();
        assert_eq!(idx.levels(), 3);
        assert_eq!(idx.node_colors(node(0, 0)), vec![1, 2, 3]);
        assert_eq!(idx.node_colors(node(1, 0)), vec![1, 2]);
        assert_eq!(idx.node_colors(node(1, 1)), vec![1, 3]);
        let bottom: Vec<_> = (0..4).map(|k| idx.node_colors(node(2, k))).collect();
        assert_eq!(bottom, vec![vec![1], vec![2], vec![1], vec![3]]);
    }

    #[test]
    fn single_element_and_constant_arrays() {
        let idx = CcqIndex::build(&[7]).unwrap();
        assert_eq!(idx.levels(), 1);
        assert_eq!(idx.node_colors(node(0, 0)), vec![7]);

        let idx = CcqIndex::build(&[1, 1, 1, 1]).unwrap();
        for level in 0..3 {
            for k in 0..1 << level {
                assert_eq!(idx.node_colors(node(level, k)), vec![1]);
            }
        }
        assert_eq!(
            idx.common_colors(Interval::new(1, 1), Interval::new(3, 4))
                .unwrap(),
            vec![1]
        );
        assert!(matches!(CcqIndex::build(&[]), Err(Error::EmptyArray)));
    }

    #[test]
    fn padding_never_contributes() {
        let idx = CcqIndex::build(&[4, 5, 6]).unwrap();
        assert_eq!(idx.levels(), 3);
        assert!(idx.node_colors(node(2, 3)).is_empty());
        assert_eq!(idx.node_colors(node(1, 1)), vec![6]);
        assert_eq!(idx.node_range(node(1, 1)), Some(Interval::new(3, 3)));
        assert_eq!(idx.node_range(node(2, 3)), None);
    }

    #[test]
    fn decompose_examples() {
        let idx = CcqIndex::build(&[1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        let ranges: Vec<Interval> = idx
            .decompose(Interval::new(2, 7))
            .unwrap()
            .into_iter()
            .map(|n| idx.node_range(n).unwrap())
            .collect();
        assert_eq!(
            ranges,
            vec![
                Interval::new(2, 2),
                Interval::new(3, 4),
                Interval::new(5, 6),
                Interval::new(7, 7)
            ]
        );
        assert_eq!(
            idx.decompose(Interval::new(1, 8)).unwrap(),
            vec![node(0, 0)]
        );
        assert_eq!(
            idx.decompose(Interval::new(5, 5)).unwrap(),
            vec![node(3, 4)]
        );
        assert!(matches!(
            idx.decompose(Interval::new(0, 3)),
            Err(Error::Range { .. })
        ));
        assert!(idx.decompose(Interval::new(3, 9)).is_err());
        assert!(idx.decompose(Interval::new(4, 3)).is_err());
    }

    #[test]
    fn common_colors_example() {
        let a = [1, 2, 1, 3, 2, 4, 1, 3];
        let idx = CcqIndex::build(&a).unwrap();
        let (i1, i2) = (Interval::new(1, 3), Interval::new(4, 8));
        assert_eq!(idx.common_colors(i1, i2).unwrap(), vec![1, 2]);
        assert_eq!(idx.common_colors(i2, i1).unwrap(), vec![1, 2]);
        assert_eq!(
            idx.common_colors(i1, i2).unwrap(),
            naive_common_colors(&a, i1, i2).unwrap()
        );
        assert!(idx
            .common_colors(Interval::new(6, 6), Interval::new(1, 3))
            .unwrap()
            .is_empty());
        assert!(matches!(
            idx.common_colors(Interval::new(1, 4), Interval::new(4, 8)),
            Err(Error::OverlappingIntervals { .. })
        ));
    }

    #[test]
    fn scratch_is_reusable() {
        let a = [3, 1, 3, 1, 2, 2, 9, 3];
        let idx = CcqIndex::build(&a).unwrap();
        let mut scratch = CcqScratch::default();
        for (i1, i2) in [((1, 2), (3, 8)), ((1, 1), (3, 3)), ((5, 6), (1, 4))] {
            let (i1, i2) = (Interval::new(i1.0, i1.1), Interval::new(i2.0, i2.1));
            let (got, _) = idx.common_colors_with(&mut scratch, i1, i2).unwrap();
            assert_eq!(got, naive_common_colors(&a, i1, i2).unwrap());
        }
    }

    #[test]
    fn color_file_parsing() {
        assert_eq!(parse_colors("3\n1\n3\n").unwrap(), vec![3, 1, 3]);
        assert!(matches!(
            parse_colors("3\nx\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn interval_parsing() {
        assert_eq!("3:9".parse::<Interval>(), Ok(Interval::new(3, 9)));
        assert!("3-9".parse::<Interval>().is_err());
        assert!("a:9".parse::<Interval>().is_err());
    }

    #[test]
    fn persistence_round_trip() {
        let idx = CcqIndex::build(&[5, 1, 5, 2, 9]).unwrap();
        let mut bytes = Vec::new();
        idx.write_to(&mut bytes).unwrap();
        let back = CcqIndex::read_from(&mut bytes.as_slice()).unwrap();
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(bytes, again);
        assert_eq!(
            back.common_colors(Interval::new(1, 2), Interval::new(3, 5))
                .unwrap(),
            vec![5]
        );
    }
}
