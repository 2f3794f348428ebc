//! Two-pattern document listing and two-dimensional substring indexing.
//!
//! Documents are concatenated, each terminated by the sentinel byte `0`, and
//! suffix-sorted. Suffixes starting at a sentinel are dropped, so rank `r`
//! (1-indexed) of the suffix array maps to exactly one owning document: its
//! color. A pattern's occurrences form one rank interval, and the documents
//! containing both `p` and `q` are the colors common to their two intervals.

use std::collections::HashSet;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, WriteBytesExt};
use serde::Deserialize;

use crate::ccq::{CcqIndex, Interval};
use crate::error::{Error, Result};
use crate::fsi_index::persist::{read_len, read_u32s, read_u64s, write_u32s, write_u64s};
use crate::suffix_array::suffix_array;

pub const SENTINEL: u8 = 0;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Document {
    pub id: u64,
    #[serde(deserialize_with = "text_bytes")]
    pub text: Vec<u8>,
}

fn text_bytes<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<u8>, D::Error> {
    String::deserialize(d).map(String::into_bytes)
}

impl Document {
    pub fn new(id: u64, text: impl Into<Vec<u8>>) -> Self {
        Document {
            id,
            text: text.into(),
        }
    }

    /// Documents with ids `1..=texts.len()`.
    pub fn numbered<T: AsRef<[u8]>>(texts: &[T]) -> Vec<Document> {
        texts
            .iter()
            .enumerate()
            .map(|(k, t)| Document::new(k as u64 + 1, t.as_ref()))
            .collect()
    }
}

/// Loads a corpus.
///
/// A directory yields its `*.txt` files sorted by file name, with ids
/// `1, 2, …` in that order. Any other path is read as JSON lines with fields
/// `id` (integer) and `text` (string); blank lines are skipped.
pub fn load_corpus(path: &Path) -> Result<Vec<Document>> {
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        files
            .iter()
            .enumerate()
            .map(|(k, p)| Ok(Document::new(k as u64 + 1, fs::read(p)?)))
            .collect()
    } else {
        let text = fs::read_to_string(path)?;
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse {
                    line: n + 1,
                    message: e.to_string(),
                })
            })
            .collect()
    }
}

/// 1-indexed inclusive rank range; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaInterval {
    pub lo: usize,
    pub hi: usize,
}

impl SaInterval {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn width(&self) -> usize {
        (self.hi + 1).saturating_sub(self.lo)
    }

    pub fn as_interval(&self) -> Option<Interval> {
        (!self.is_empty()).then_some(Interval::new(self.lo, self.hi))
    }

    fn shifted(self, by: usize) -> SaInterval {
        SaInterval {
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }
}

/// Sentinel-separated concatenation of several texts with its suffix array,
/// restricted to suffixes that do not start at a sentinel.
#[derive(Debug, Clone)]
pub struct GeneralizedSuffixArray {
    text: Vec<u8>,
    sa: Vec<u32>,
    /// Index into the input texts for each rank.
    owner: Vec<u32>,
}

impl GeneralizedSuffixArray {
    /// Fails with the offending position if a text contains the sentinel.
    fn build<T: AsRef<[u8]>>(texts: &[T]) -> std::result::Result<Self, usize> {
        let mut text = Vec::new();
        let mut starts = Vec::with_capacity(texts.len());
        for (k, t) in texts.iter().enumerate() {
            let t = t.as_ref();
            if t.contains(&SENTINEL) {
                return Err(k);
            }
            starts.push(text.len());
            text.extend_from_slice(t);
            text.push(SENTINEL);
        }
        let sa: Vec<u32> = suffix_array(&text)
            .into_iter()
            .filter(|&p| text[p as usize] != SENTINEL)
            .collect();
        let owner = sa
            .iter()
            .map(|&p| (starts.partition_point(|&s| s <= p as usize) - 1) as u32)
            .collect();
        Ok(GeneralizedSuffixArray { text, sa, owner })
    }

    fn from_parts(text: Vec<u8>, sa: Vec<u32>) -> Result<Self> {
        let mut starts = vec![0usize];
        starts.extend(
            text.iter()
                .enumerate()
                .filter(|(_, &b)| b == SENTINEL)
                .map(|(p, _)| p + 1),
        );
        if sa
            .iter()
            .any(|&p| p as usize >= text.len() || text[p as usize] == SENTINEL)
        {
            return Err(Error::Format("suffix array entry out of range".into()));
        }
        let owner = sa
            .iter()
            .map(|&p| (starts.partition_point(|&s| s <= p as usize) - 1) as u32)
            .collect();
        Ok(GeneralizedSuffixArray { text, sa, owner })
    }

    pub fn len(&self) -> usize {
        self.sa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sa.is_empty()
    }

    /// 0-based suffix start positions in the concatenated text, sorted.
    pub fn suffixes(&self) -> &[u32] {
        &self.sa
    }

    pub fn text(&self) -> &[u8] {
        &self.text
    }

    fn prefix(&self, rank: usize, len: usize) -> &[u8] {
        let start = self.sa[rank] as usize;
        &self.text[start..(start + len).min(self.text.len())]
    }

    /// First rank in `[lo, hi)` where `pred` turns false.
    fn partition(&self, mut lo: usize, mut hi: usize, pred: impl Fn(usize) -> bool) -> usize {
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if pred(mid) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Ranks of the suffixes starting with `p`, by two binary searches.
    fn interval(&self, p: &[u8]) -> SaInterval {
        let n = self.sa.len();
        let lo = self.partition(0, n, |r| self.prefix(r, p.len()) < p);
        let hi = self.partition(lo, n, |r| self.prefix(r, p.len()) == p);
        // 1-indexed; an empty range comes out as lo = hi + 1.
        SaInterval { lo: lo + 1, hi }
    }
}

fn check_pattern(p: &[u8]) -> Result<()> {
    if p.is_empty() {
        Err(Error::EmptyPattern)
    } else {
        Ok(())
    }
}

fn distinct_sorted(colors: &[u64]) -> Vec<u64> {
    let mut out = colors.to_vec();
    out.sort_unstable();
    out.dedup();
    out
}

/// Document listing index over a corpus.
#[derive(Debug, Clone)]
pub struct DocIndex {
    ids: Vec<u64>,
    gsa: GeneralizedSuffixArray,
    /// Document id owning the suffix at each rank.
    colors: Vec<u64>,
    ccq: CcqIndex,
}

impl DocIndex {
    pub fn build(corpus: &[Document]) -> Result<Self> {
        if corpus.iter().all(|d| d.text.is_empty()) {
            return Err(Error::Invalid("corpus has no nonempty document".into()));
        }
        let mut seen = HashSet::new();
        if let Some(d) = corpus.iter().find(|d| !seen.insert(d.id)) {
            return Err(Error::Invalid(format!("duplicate document id {}", d.id)));
        }
        let texts: Vec<&[u8]> = corpus.iter().map(|d| d.text.as_slice()).collect();
        let gsa = GeneralizedSuffixArray::build(&texts)
            .map_err(|k| Error::Sentinel { doc: corpus[k].id })?;
        let ids: Vec<u64> = corpus.iter().map(|d| d.id).collect();
        let colors: Vec<u64> = gsa.owner.iter().map(|&o| ids[o as usize]).collect();
        let ccq = CcqIndex::build(&colors)?;
        Ok(DocIndex {
            ids,
            gsa,
            colors,
            ccq,
        })
    }

    pub fn suffix_array(&self) -> &GeneralizedSuffixArray {
        &self.gsa
    }

    /// Document id per suffix rank.
    pub fn colors(&self) -> &[u64] {
        &self.colors
    }

    pub fn ccq(&self) -> &CcqIndex {
        &self.ccq
    }

    pub fn pattern_interval(&self, p: &[u8]) -> Result<SaInterval> {
        check_pattern(p)?;
        Ok(self.gsa.interval(p))
    }

    /// Ascending ids of the documents containing `p`.
    pub fn list_docs_one(&self, p: &[u8]) -> Result<Vec<u64>> {
        let iv = self.pattern_interval(p)?;
        Ok(match iv.as_interval() {
            Some(iv) => distinct_sorted(&self.colors[iv.lo - 1..iv.hi]),
            None => Vec::new(),
        })
    }

    /// Ascending ids of the documents containing both `p` and `q`.
    pub fn list_docs_two(&self, p: &[u8], q: &[u8]) -> Result<Vec<u64>> {
        let (a, b) = (self.pattern_interval(p)?, self.pattern_interval(q)?);
        let (a, b) = match (a.as_interval(), b.as_interval()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Ok(Vec::new()),
        };
        if !a.overlaps(&b) {
            return self.ccq.common_colors(a, b);
        }
        // Nested intervals: one pattern prefixes the other, so every document
        // holding the inner one holds both.
        let inner = if a.contains(&b) {
            b
        } else if b.contains(&a) {
            a
        } else {
            return Err(Error::Internal(format!(
                "pattern intervals [{}, {}] and [{}, {}] partially overlap",
                a.lo, a.hi, b.lo, b.hi
            )));
        };
        Ok(distinct_sorted(&self.colors[inner.lo - 1..inner.hi]))
    }

    /// Text of each document, in input order, with its id.
    pub fn documents(&self) -> Vec<Document> {
        let mut docs = Vec::with_capacity(self.ids.len());
        let mut start = 0;
        for &id in &self.ids {
            let end = start
                + self.gsa.text[start..]
                    .iter()
                    .position(|&b| b == SENTINEL)
                    .unwrap();
            docs.push(Document::new(id, &self.gsa.text[start..end]));
            start = end + 1;
        }
        docs
    }

    /// `DOC1` container: ids, concatenated text, suffix array, then the
    /// embedded `CCQ1` color index.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"DOC1")?;
        write_u64s(w, &self.ids)?;
        w.write_u64::<LE>(self.gsa.text.len() as u64)?;
        w.write_all(&self.gsa.text)?;
        write_u32s(w, &self.gsa.sa)?;
        self.ccq.write_to(w)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"DOC1" {
            return Err(Error::Format("bad magic, expected DOC1".into()));
        }
        let ids = read_u64s(r)?;
        let mut text = vec![0u8; read_len(r, 1)?];
        r.read_exact(&mut text)?;
        let sa = read_u32s(r)?;
        let ccq = CcqIndex::read_from(r)?;
        let sentinels = text.iter().filter(|&&b| b == SENTINEL).count();
        if sentinels != ids.len() || text.last().is_some_and(|&b| b != SENTINEL) {
            return Err(Error::Format("document text does not match id list".into()));
        }
        let gsa = GeneralizedSuffixArray::from_parts(text, sa)?;
        let colors: Vec<u64> = gsa.owner.iter().map(|&o| ids[o as usize]).collect();
        if ccq.len() != colors.len() || (1..=colors.len()).any(|p| ccq.color_at(p) != colors[p - 1])
        {
            return Err(Error::Format(
                "color index does not match suffix array".into(),
            ));
        }
        Ok(DocIndex {
            ids,
            gsa,
            colors,
            ccq,
        })
    }
}

/// Two-dimensional substring index over string pairs with ids `1..=n`.
#[derive(Debug, Clone)]
pub struct PairIndex {
    first: GeneralizedSuffixArray,
    second: GeneralizedSuffixArray,
    /// First-component ranks, then second-component ranks; color = pair id.
    colors: Vec<u64>,
    ccq: CcqIndex,
}

impl PairIndex {
    pub fn build<A: AsRef<[u8]>, B: AsRef<[u8]>>(pairs: &[(A, B)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Invalid("no string pairs".into()));
        }
        let firsts: Vec<&[u8]> = pairs.iter().map(|(a, _)| a.as_ref()).collect();
        let seconds: Vec<&[u8]> = pairs.iter().map(|(_, b)| b.as_ref()).collect();
        let sentinel = |k: usize| Error::Sentinel { doc: k as u64 + 1 };
        let first = GeneralizedSuffixArray::build(&firsts).map_err(sentinel)?;
        let second = GeneralizedSuffixArray::build(&seconds).map_err(sentinel)?;
        let colors: Vec<u64> = first
            .owner
            .iter()
            .chain(&second.owner)
            .map(|&o| o as u64 + 1)
            .collect();
        if colors.is_empty() {
            return Err(Error::Invalid("all strings are empty".into()));
        }
        let ccq = CcqIndex::build(&colors)?;
        Ok(PairIndex {
            first,
            second,
            colors,
            ccq,
        })
    }

    pub fn colors(&self) -> &[u64] {
        &self.colors
    }

    /// Ascending ids of the pairs whose first string contains `s1` and whose
    /// second string contains `s2`.
    pub fn pair_query(&self, s1: &[u8], s2: &[u8]) -> Result<Vec<u64>> {
        check_pattern(s1)?;
        check_pattern(s2)?;
        let a = self.first.interval(s1);
        let b = self.second.interval(s2).shifted(self.first.len());
        match (a.as_interval(), b.as_interval()) {
            (Some(a), Some(b)) => self.ccq.common_colors(a, b),
            _ => Ok(Vec::new()),
        }
    }
}
