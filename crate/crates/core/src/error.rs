use std::io;

use thiserror::Error;

/// Errors produced by loading, building, querying and persisting indices.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("set {set} lists element {element} more than once")]
    DuplicateElement { set: usize, element: u64 },

    #[error("set id {id} out of range (collection has {len} sets)")]
    SetIndex { id: usize, len: usize },

    #[error("input is not strictly ascending at position {position}")]
    Unsorted { position: usize },

    #[error("precomputed matrix needs {required} bytes, budget is {budget} bytes")]
    Capacity { required: u128, budget: u128 },

    #[error("interval [{lo}, {hi}] is not within [1, {len}]")]
    Range { lo: usize, hi: usize, len: usize },

    #[error("intervals [{}, {}] and [{}, {}] overlap", .first.0, .first.1, .second.0, .second.1)]
    OverlappingIntervals {
        first: (usize, usize),
        second: (usize, usize),
    },

    #[error("color array is empty")]
    EmptyArray,

    #[error("pattern is empty")]
    EmptyPattern,

    #[error("document {doc} contains the reserved sentinel byte 0")]
    Sentinel { doc: u64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("malformed index file: {0}")]
    Format(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
