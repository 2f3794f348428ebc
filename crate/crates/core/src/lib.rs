//! Fast set intersection index and its applications.
//!
//! - [`set_store`]: the set collection with two-way membership tables.
//! - [`fsi_index`]: the intersection tree, plus root-only emptiness and size
//!   queries.
//! - [`oracles`]: brute-force baselines.
//! - [`ccq`]: common colors queries over dyadic blocks of a color array.
//! - [`doc_index`]: two-pattern document listing and two-dimensional
//!   substring indexing over generalized suffix arrays.
//! - [`workload`] and [`bench`]: seeded instance generation and the counter
//!   benchmark.

pub mod bench;
pub mod bitmatrix;
pub mod ccq;
pub mod doc_index;
pub mod error;
pub mod fsi_index;
pub mod oracles;
pub mod set_store;
pub mod suffix_array;
pub mod workload;

pub use ccq::{CanonicalNode, CcqIndex, Interval};
pub use doc_index::{DocIndex, Document, PairIndex, SaInterval};
pub use error::{Error, Result};
pub use fsi_index::{BuildConfig, FsiIndex, SubsetMode, WorkCounters};
pub use set_store::{Element, SetCollection, SetId};
