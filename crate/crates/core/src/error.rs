use thiserror::Error;

use crate::latin::{Colour, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("missing header line \"n k\"")]
    MissingHeader,
    #[error("malformed header {0:?}, expected \"n k\"")]
    MalformedHeader(String),
    #[error("line {line}: cannot parse {token:?} as a colour id")]
    BadToken { line: usize, token: String },
    #[error("line {line}: colour {colour} is outside 0..{k}")]
    ColourOutOfRange { line: usize, colour: Colour, k: usize },
    #[error("line {line}: expected {expected} entries, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} rows, found {found}")]
    MissingRows { expected: usize, found: usize },
    #[error("line {line}: unexpected data after the last row")]
    TrailingData { line: usize },
    #[error("cannot parse matching: {0}")]
    Matching(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("array order must be at least 1")]
    EmptyArray,
    #[error("grid has {found} cells, expected {expected}")]
    Dimensions { expected: usize, found: usize },
    #[error("invalid Latin array: {}", first_violation(.0))]
    InvalidArray(Vec<Violation>),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("target colour count {target} outside {min}..={max}")]
    ColourTarget { target: usize, min: usize, max: usize },
    #[error("instance too large for exact search: {what} = {value} exceeds {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("empty part in subpair")]
    EmptyPart,
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

fn first_violation(v: &[Violation]) -> String {
    match v.first() {
        Some(first) if v.len() > 1 => format!("{first} (and {} more)", v.len() - 1),
        Some(first) => first.to_string(),
        None => "no violations recorded".to_string(),
    }
}
