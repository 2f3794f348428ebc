//! Benchmark sweep over generated instances, reporting work counters as CSV.
//!
//! Each grid cell is one generated collection of roughly `N` elements. Sets are
//! sized uniformly in `[2√N, 6√N]`, so every set is large at the root, and the
//! overlap fraction controls the output size. Cell seeds and sampled pairs come
//! from ChaCha8 streams derived from the bench seed, so the CSV is a pure
//! function of the configuration unless wall-clock timing is switched on.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fsi_index::{BuildConfig, FsiIndex, WorkCounters};
use crate::oracles::{naive_hash_intersect, naive_sorted_intersect};
use crate::workload::{GenSpec, SizeDist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMode {
    Fsi,
    NaiveHash,
    NaiveSorted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub m: u64,
    pub i: u64,
    pub j: u64,
    pub output: u64,
    pub hash_probes: u64,
    pub matrix_lookups: u64,
    pub nodes_visited: u64,
    pub stopper_elements_scanned: u64,
    pub wall_nanos: u64,
    pub mode: BenchMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Target total sizes, one instance per size and overlap.
    pub sizes: Vec<u64>,
    pub overlaps: Vec<f64>,
    pub pairs_per_instance: usize,
    pub seed: u64,
    pub build: BuildConfig,
    pub baselines: bool,
    pub wall_clock: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: [12, 14, 16, 18, 20].iter().map(|e| 1u64 << e).collect(),
            overlaps: vec![0.0, 0.001, 0.01, 0.1, 0.5],
            pairs_per_instance: 20,
            seed: 0,
            build: BuildConfig::default(),
            baselines: true,
            wall_clock: false,
        }
    }
}

/// Generator parameters for the cell of target size `n`.
pub fn instance_spec(n: u64, overlap: f64, seed: u64) -> GenSpec {
    let root = (n as f64).sqrt().ceil() as u64;
    let m = (n / (4 * root)).max(2) as usize;
    GenSpec {
        m,
        size_dist: SizeDist::Uniform {
            lo: 2 * root,
            hi: 6 * root,
        },
        universe: 4 * n + 12 * root,
        target_overlap: overlap,
        seed,
    }
}

fn timed<T>(on: bool, f: impl FnOnce() -> T) -> (T, u64) {
    if !on {
        return (f(), 0);
    }
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_nanos() as u64)
}

fn run_cell(cfg: &BenchConfig, n: u64, overlap: f64, cell_seed: u64) -> Result<Vec<BenchRow>> {
    let col = instance_spec(n, overlap, cell_seed).collection()?;
    let idx = FsiIndex::build(col, cfg.build);
    let col = idx.collection();
    let (total, m) = (col.total_size() as u64, col.len());

    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut rows = Vec::new();
    for _ in 0..cfg.pairs_per_instance {
        // Distinct ids whenever possible, so disjoint instances yield empty outputs.
        let i = rng.random_range(0..m);
        let mut j = rng.random_range(0..m.saturating_sub(1).max(1));
        if m > 1 && j >= i {
            j += 1;
        }
        let row = |out: usize, w: WorkCounters, nanos: u64, mode: BenchMode| BenchRow {
            n: total,
            m: m as u64,
            i: i as u64,
            j: j as u64,
            output: out as u64,
            hash_probes: w.hash_probes,
            matrix_lookups: w.matrix_lookups,
            nodes_visited: w.nodes_visited,
            stopper_elements_scanned: w.stopper_elements_scanned,
            wall_nanos: nanos,
            mode,
        };

        let (res, nanos) = timed(cfg.wall_clock, || idx.intersect(i, j));
        let (out, work) = res?;
        let (expect, hash_nanos) = timed(cfg.wall_clock, || naive_hash_intersect(col, i, j));
        let expect = expect?;
        if out != expect {
            return Err(Error::Internal(format!(
                "index answer for ({i}, {j}) differs from the oracle"
            )));
        }
        rows.push(row(out.len(), work, nanos, BenchMode::Fsi));

        if cfg.baselines {
            let (a, b) = (col.set(i)?, col.set(j)?);
            let small = a.len().min(b.len()) as u64;
            let hash_work = WorkCounters {
                hash_probes: small,
                stopper_elements_scanned: small,
                ..WorkCounters::default()
            };
            rows.push(row(
                expect.len(),
                hash_work,
                hash_nanos,
                BenchMode::NaiveHash,
            ));

            let (sorted, nanos) = timed(cfg.wall_clock, || naive_sorted_intersect(a, b));
            let scan = WorkCounters {
                stopper_elements_scanned: small,
                ..WorkCounters::default()
            };
            rows.push(row(sorted?.len(), scan, nanos, BenchMode::NaiveSorted));
        }
    }
    Ok(rows)
}

/// Runs every cell, in parallel, and returns rows in grid order.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cells: Vec<(u64, f64, u64)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| cfg.overlaps.iter().map(move |&f| (n, f)))
        .map(|(n, f)| (n, f, seeds.random()))
        .collect();
    let per_cell = cells
        .par_iter()
        .map(|&(n, f, s)| run_cell(cfg, n, f, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record([
            "N",
            "m",
            "i",
            "j",
            "output",
            "hash_probes",
            "matrix_lookups",
            "nodes_visited",
            "stopper_elements_scanned",
            "wall_nanos",
            "mode",
        ])
        .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fit {
    Fitted {
        exponent: f64,
        intercept: f64,
        points: usize,
    },
    Skipped {
        reason: String,
    },
}

/// Least-squares fit of `ln(work + 1)` against `ln(N · (output + 1))` over the
/// index rows, where work is `stopper_elements_scanned`.
pub fn fit_exponent(rows: &[BenchRow]) -> Fit {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.mode == BenchMode::Fsi)
        .map(|r| {
            let x = (r.n as f64 * (r.output as f64 + 1.0)).ln();
            let y = (r.stopper_elements_scanned as f64 + 1.0).ln();
            (x, y)
        })
        .collect();
    if pts.is_empty() {
        return Fit::Skipped {
            reason: "no index rows to fit".into(),
        };
    }
    if rows.iter().all(|r| r.output == 0) {
        return Fit::Skipped {
            reason: "every sampled pair is disjoint, so output carries no signal".into(),
        };
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx < 1e-12 {
        return Fit::Skipped {
            reason: "all rows share one N·(output+1) value".into(),
        };
    }
    let exponent = sxy / sxx;
    Fit::Fitted {
        exponent,
        intercept: my - exponent * mx,
        points: pts.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchConfig {
        BenchConfig {
            sizes: vec![1 << 10, 1 << 12],
            overlaps: vec![0.0, 0.3],
            pairs_per_instance: 5,
            seed: 11,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn rows_are_deterministic_and_checked() {
        let a = run_bench(&small()).unwrap();
        let b = run_bench(&small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2 * 2 * 5 * 3);
        assert!(a.iter().all(|r| r.wall_nanos == 0));
    }

    #[test]
    fn csv_header_matches_schema() {
        let mut buf = Vec::new();
        write_csv(&run_bench(&small()).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "N,m,i,j,output,hash_probes,matrix_lookups,nodes_visited,stopper_elements_scanned,wall_nanos,mode"
        );
        assert!(text.contains(",naive_hash\n") && text.contains(",naive_sorted\n"));

        let mut empty = Vec::new();
        write_csv(&[], &mut empty).unwrap();
        assert!(String::from_utf8(empty).unwrap().starts_with("N,m,i,j,"));
    }

    #[test]
    fn disjoint_grid_skips_fit() {
        let cfg = BenchConfig {
            overlaps: vec![0.0],
            ..small()
        };
        let rows = run_bench(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.output == 0 && r.i != r.j));
        assert!(matches!(fit_exponent(&rows), Fit::Skipped { .. }));
    }

    #[test]
    fn fit_recovers_known_slope() {
        let rows: Vec<BenchRow> = (1..6u64)
            .map(|k| {
                let n = 1u64 << (2 * k);
                BenchRow {
                    n,
                    m: 2,
                    i: 0,
                    j: 1,
                    output: 0,
                    hash_probes: 0,
                    matrix_lookups: 0,
                    nodes_visited: 0,
                    stopper_elements_scanned: (1 << k) - 1,
                    wall_nanos: 0,
                    mode: BenchMode::Fsi,
                }
            })
            .collect();
        let mut rows = rows;
        rows.push(BenchRow {
            output: 3,
            n: 1 << 8,
            stopper_elements_scanned: (1 << 5) - 1,
            ..rows[0].clone()
        });
        match fit_exponent(&rows) {
            Fit::Fitted { exponent, .. } => assert!((exponent - 0.5).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
}
