//! Seeded synthetic set collections.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, so a [`GenSpec`] produces the same collection on every
//! platform.
//!
//! Each set draws a fraction `target_overlap` of its elements from a shared
//! core of `⌈target_overlap · max_size⌉` ids (`0..core`) and the rest from ids
//! that no other set uses. With `target_overlap = 0` every pair is disjoint.

use std::collections::HashSet;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::error::{Error, Result};
use crate::set_store::{Element, SetCollection};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeDist {
    Uniform {
        lo: u64,
        hi: u64,
    },
    /// Zipf over `1..=max` with exponent `s`.
    Zipf {
        s: f64,
        max: u64,
    },
}

impl SizeDist {
    pub fn max(&self) -> u64 {
        match *self {
            SizeDist::Uniform { hi, .. } => hi,
            SizeDist::Zipf { max, .. } => max,
        }
    }

    /// Expected set size.
    pub fn mean(&self) -> f64 {
        match *self {
            SizeDist::Uniform { lo, hi } => (lo + hi) as f64 / 2.0,
            SizeDist::Zipf { s, max } => {
                let (mut num, mut den) = (0.0, 0.0);
                for k in 1..=max {
                    let w = (k as f64).powf(-s);
                    num += k as f64 * w;
                    den += w;
                }
                num / den
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SizeDist::Uniform { lo, hi } if lo <= hi => Ok(()),
            SizeDist::Zipf { s, max } if max >= 1 && s > 0.0 && s.is_finite() => Ok(()),
            other => Err(Error::Invalid(format!("bad size distribution {other:?}"))),
        }
    }
}

impl FromStr for SizeDist {
    type Err = String;

    /// `uniform:LO:HI` or `zipf:S:MAX`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("expected uniform:LO:HI or zipf:S:MAX, got {s:?}");
        match parts.as_slice() {
            ["uniform", lo, hi] => Ok(SizeDist::Uniform {
                lo: lo.parse().map_err(|_| bad())?,
                hi: hi.parse().map_err(|_| bad())?,
            }),
            ["zipf", e, max] => Ok(SizeDist::Zipf {
                s: e.parse().map_err(|_| bad())?,
                max: max.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub m: usize,
    pub size_dist: SizeDist,
    /// Element ids are drawn from `0..universe`.
    pub universe: u64,
    pub target_overlap: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn generate(&self) -> Result<Vec<Vec<Element>>> {
        self.size_dist.validate()?;
        if !(0.0..=1.0).contains(&self.target_overlap) {
            return Err(Error::Invalid(format!(
                "target overlap {} not in [0, 1]",
                self.target_overlap
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let sizes: Vec<u64> = match self.size_dist {
            SizeDist::Uniform { lo, hi } => {
                (0..self.m).map(|_| rng.random_range(lo..=hi)).collect()
            }
            SizeDist::Zipf { s, max } => {
                let zipf = Zipf::new(max as f64, s).map_err(|e| Error::Invalid(e.to_string()))?;
                (0..self.m).map(|_| zipf.sample(&mut rng) as u64).collect()
            }
        };

        let f = self.target_overlap;
        let core = (f * self.size_dist.max() as f64).ceil() as u64;
        let core_parts: Vec<u64> = sizes
            .iter()
            .map(|&s| ((f * s as f64).round() as u64).min(core))
            .collect();
        let private: u64 = sizes.iter().zip(&core_parts).map(|(s, k)| s - k).sum();
        let available = self.universe.saturating_sub(core);
        if private > available / 2 {
            return Err(Error::Invalid(format!(
                "universe {} too small: need at least {} ids",
                self.universe,
                core + 2 * private
            )));
        }

        let mut used: HashSet<Element> = HashSet::with_capacity(private as usize);
        let mut sets = Vec::with_capacity(self.m);
        for (&s, &k) in sizes.iter().zip(&core_parts) {
            let mut set: Vec<Element> = sample(&mut rng, core as usize, k as usize)
                .into_iter()
                .map(|x| x as Element)
                .collect();
            while (set.len() as u64) < s {
                let x = rng.random_range(core..self.universe);
                if used.insert(x) {
                    set.push(x);
                }
            }
            set.sort_unstable();
            sets.push(set);
        }
        Ok(sets)
    }

    pub fn collection(&self) -> Result<SetCollection> {
        SetCollection::from_sets(self.generate()?, false)
    }
}

/// Collections with independently uniform elements from a small universe,
/// so that overlaps arise naturally rather than through a shared core.
pub fn random_collection(m: usize, max_size: usize, universe: u64, seed: u64) -> SetCollection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets = (0..m)
        .map(|_| {
            let size = rng.random_range(0..=max_size);
            (0..size).map(|_| rng.random_range(0..universe)).collect()
        })
        .collect();
    SetCollection::from_sets(sets, true).expect("dedupe never fails")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(overlap: f64, seed: u64) -> GenSpec {
        GenSpec {
            m: 20,
            size_dist: SizeDist::Uniform { lo: 10, hi: 50 },
            universe: 100_000,
            target_overlap: overlap,
            seed,
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            spec(0.3, 7).generate().unwrap(),
            spec(0.3, 7).generate().unwrap()
        );
        assert_ne!(
            spec(0.3, 7).generate().unwrap(),
            spec(0.3, 8).generate().unwrap()
        );
    }

    #[test]
    fn zero_overlap_is_pairwise_disjoint() {
        let col = spec(0.0, 3).collection().unwrap();
        let total: usize = col.sets().iter().map(Vec::len).sum();
        assert_eq!(col.distinct_elements(), total);
    }

    #[test]
    fn sizes_respect_distribution() {
        let sets = spec(0.5, 1).generate().unwrap();
        assert!(sets.iter().all(|s| (10..=50).contains(&s.len())));
        let z = GenSpec {
            size_dist: SizeDist::Zipf { s: 1.2, max: 30 },
            ..spec(0.2, 1)
        };
        assert!(z
            .generate()
            .unwrap()
            .iter()
            .all(|s| (1..=30).contains(&s.len())));
    }

    #[test]
    fn overlap_creates_shared_elements() {
        let col = spec(0.8, 5).collection().unwrap();
        assert!(col.distinct_elements() < col.total_size());
    }

    #[test]
    fn rejects_small_universe_and_bad_params() {
        let tight = GenSpec {
            universe: 100,
            ..spec(0.0, 1)
        };
        assert!(matches!(tight.generate(), Err(Error::Invalid(_))));
        assert!(spec(1.5, 1).generate().is_err());
        let bad = GenSpec {
            size_dist: SizeDist::Uniform { lo: 5, hi: 2 },
            ..spec(0.1, 1)
        };
        assert!(bad.generate().is_err());
    }

    #[test]
    fn parses_size_dist() {
        assert_eq!(
            "uniform:3:9".parse::<SizeDist>(),
            Ok(SizeDist::Uniform { lo: 3, hi: 9 })
        );
        assert_eq!(
            "zipf:1.5:100".parse::<SizeDist>(),
            Ok(SizeDist::Zipf { s: 1.5, max: 100 })
        );
        assert!("normal:1:2".parse::<SizeDist>().is_err());
        assert!((SizeDist::Uniform { lo: 2, hi: 4 }.mean() - 3.0).abs() < 1e-12);
    }
}
