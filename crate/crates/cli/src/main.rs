use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fsi_core::bench::{fit_exponent, run_bench, write_csv, BenchConfig, Fit};
use fsi_core::ccq::parse_colors;
use fsi_core::doc_index::load_corpus;
use fsi_core::workload::{GenSpec, SizeDist};
use fsi_core::{
    BuildConfig, CcqIndex, DocIndex, Error, FsiIndex, Interval, SetCollection, SubsetMode,
};

#[derive(Parser)]
#[command(name = "fsi", version, about = "Fast set intersection index")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a Sets File and persist it.
    Build {
        #[arg(long)]
        sets: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        build: BuildFlags,
        /// Drop duplicate elements instead of rejecting them.
        #[arg(long)]
        dedupe: bool,
    },
    /// Print `set i ∩ set j`, one element per line.
    Query {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        pair: Pair,
        /// Print the work counters to stderr.
        #[arg(long)]
        stats: bool,
    },
    /// Print whether `set i ∩ set j` is empty.
    Empty {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        pair: Pair,
    },
    /// Print `|set i ∩ set j|`.
    Size {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        pair: Pair,
    },
    /// Print the colors common to two disjoint intervals of a color array.
    Ccq {
        #[arg(long)]
        array: PathBuf,
        #[arg(long)]
        i1: Interval,
        #[arg(long)]
        i2: Interval,
        #[arg(long, default_value = "compact")]
        mode: SubsetMode,
    },
    /// Two-pattern document listing.
    Docindex {
        #[command(subcommand)]
        command: DocCommand,
    },
    /// Write a generated Sets File.
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `uniform:LO:HI` or `zipf:S:MAX`.
        #[arg(long, default_value = "uniform:1:100")]
        sizes: SizeDist,
        /// Elements are drawn below this bound; defaults to a comfortable multiple of the expected total.
        #[arg(long)]
        universe: Option<u64>,
        #[arg(long, default_value_t = 0.0)]
        overlap: f64,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the counter benchmark and write CSV.
    Bench {
        /// Comma-separated target total sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [4096u64, 16384, 65536, 262144, 1048576])]
        sizes: Vec<u64>,
        /// Comma-separated overlap fractions.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.001, 0.01, 0.1, 0.5])]
        overlaps: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        build: BuildFlags,
        /// Skip the naive baseline rows.
        #[arg(long)]
        no_baselines: bool,
        /// Record wall time; the CSV then varies between runs.
        #[arg(long)]
        wall_clock: bool,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DocCommand {
    Build {
        /// Directory of .txt files or a JSON-lines file.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(short)]
        p: String,
        /// Omit to list the documents containing `p` alone.
        #[arg(short)]
        q: Option<String>,
    },
}

#[derive(Args)]
struct BuildFlags {
    #[arg(long, default_value = "compact")]
    mode: SubsetMode,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    leaf_threshold: u64,
}

impl BuildFlags {
    fn config(&self) -> BuildConfig {
        BuildConfig::default()
            .with_mode(self.mode)
            .with_leaf_threshold(self.leaf_threshold)
    }
}

#[derive(Args)]
struct Source {
    /// Sets File to index on the fly.
    #[arg(long, required_unless_present = "index", conflicts_with = "index")]
    sets: Option<PathBuf>,
    /// Persisted index.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long, default_value = "compact")]
    mode: SubsetMode,
    /// Drop duplicate elements instead of rejecting them.
    #[arg(long)]
    dedupe: bool,
}

#[derive(Args)]
struct Pair {
    #[arg(short)]
    i: usize,
    #[arg(short)]
    j: usize,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_sets(path: &Path, dedupe: bool) -> Result<SetCollection> {
    let bytes = read(path)?;
    SetCollection::load(bytes.as_slice(), dedupe).with_context(|| format!("in {}", path.display()))
}

impl Source {
    fn index(&self) -> Result<FsiIndex> {
        match (&self.sets, &self.index) {
            (Some(sets), _) => {
                let col = load_sets(sets, self.dedupe)?;
                Ok(FsiIndex::build(
                    col,
                    BuildConfig::default().with_mode(self.mode),
                ))
            }
            (None, Some(index)) => FsiIndex::from_bytes(&read(index)?)
                .with_context(|| format!("in {}", index.display())),
            (None, None) => unreachable!("clap requires one input"),
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_lines<T: std::fmt::Display>(items: &[T]) -> Result<()> {
    let mut out = output(None)?;
    for x in items {
        writeln!(out, "{x}")?;
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build {
            sets,
            out,
            build,
            dedupe,
        } => {
            let idx = FsiIndex::build(load_sets(&sets, dedupe)?, build.config());
            fs::write(&out, idx.to_bytes())
                .with_context(|| format!("cannot write {}", out.display()))?;
        }
        Command::Query {
            source,
            pair,
            stats,
        } => {
            let (elements, work) = source.index()?.intersect(pair.i, pair.j)?;
            print_lines(&elements)?;
            if stats {
                eprintln!("{work:?}");
            }
        }
        Command::Empty { source, pair } => {
            println!("{}", source.index()?.intersection_empty(pair.i, pair.j)?);
        }
        Command::Size { source, pair } => {
            println!("{}", source.index()?.intersection_size(pair.i, pair.j)?);
        }
        Command::Ccq {
            array,
            i1,
            i2,
            mode,
        } => {
            let text = String::from_utf8(read(&array)?).context("color array is not UTF-8")?;
            let colors = parse_colors(&text).with_context(|| format!("in {}", array.display()))?;
            let idx = CcqIndex::build_with(&colors, BuildConfig::default().with_mode(mode))?;
            print_lines(&idx.common_colors(i1, i2)?)?;
        }
        Command::Docindex { command } => match command {
            DocCommand::Build { corpus, out } => {
                if !corpus.exists() {
                    return Err(Error::Io(io::Error::new(
                        io::ErrorKind::NotFound,
                        format!("{} does not exist", corpus.display()),
                    ))
                    .into());
                }
                let idx = DocIndex::build(&load_corpus(&corpus)?)?;
                let mut w = output(Some(&out))?;
                idx.write_to(&mut w)?;
                w.flush()?;
            }
            DocCommand::Query { index, p, q } => {
                let idx = DocIndex::read_from(&mut read(&index)?.as_slice())
                    .with_context(|| format!("in {}", index.display()))?;
                let docs = match q {
                    Some(q) => idx.list_docs_two(p.as_bytes(), q.as_bytes())?,
                    None => idx.list_docs_one(p.as_bytes())?,
                };
                print_lines(&docs)?;
            }
        },
        Command::Gen {
            m,
            seed,
            sizes,
            universe,
            overlap,
            out,
        } => {
            let universe = universe
                .unwrap_or_else(|| 4 * (m as u64).max(1) * sizes.max().max(1) + sizes.max());
            let spec = GenSpec {
                m,
                size_dist: sizes,
                universe,
                target_overlap: overlap,
                seed,
            };
            let col = spec.collection()?;
            let mut w = output(out.as_deref())?;
            col.write(&mut w)?;
            w.flush()?;
        }
        Command::Bench {
            sizes,
            overlaps,
            pairs,
            seed,
            build,
            no_baselines,
            wall_clock,
            out,
        } => {
            let cfg = BenchConfig {
                sizes,
                overlaps,
                pairs_per_instance: pairs,
                seed,
                build: build.config(),
                baselines: !no_baselines,
                wall_clock,
            };
            let rows = run_bench(&cfg)?;
            let mut w = output(out.as_deref())?;
            write_csv(&rows, &mut w)?;
            w.flush()?;
            match fit_exponent(&rows) {
                Fit::Fitted {
                    exponent,
                    intercept,
                    points,
                } => {
                    eprintln!("fitted exponent b = {exponent:.4} (intercept {intercept:.4}, {points} queries)")
                }
                Fit::Skipped { reason } => eprintln!("regression skipped: {reason}"),
            }
        }
    }
    Ok(())
}

/// 1 for missing or unreadable input, 2 for bad arguments, 3 for broken
/// invariants.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|c| c.downcast_ref::<io::Error>().is_some()) {
        return 1;
    }
    match err.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Internal(_)) => 3,
        Some(
            Error::SetIndex { .. }
            | Error::Range { .. }
            | Error::OverlappingIntervals { .. }
            | Error::EmptyPattern
            | Error::EmptyArray
            | Error::Invalid(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_errors_to_exit_codes() {
        let internal = anyhow::Error::from(Error::Internal("bad tree".into()));
        assert_eq!(exit_code(&internal), 3);
        let range = anyhow::Error::from(Error::SetIndex { id: 4, len: 2 });
        assert_eq!(exit_code(&range), 2);
        let missing = anyhow::Error::from(Error::Io(io::Error::from(io::ErrorKind::NotFound)));
        assert_eq!(exit_code(&missing.context("cannot read x")), 1);
        let parse = anyhow::Error::from(Error::Parse {
            line: 3,
            message: "x".into(),
        });
        assert_eq!(exit_code(&parse), 1);
    }
}
