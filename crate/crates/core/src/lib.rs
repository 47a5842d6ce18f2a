//! Rainbow perfect matchings (transversals) of Latin arrays.

pub mod engine;
pub mod error;
pub mod generators;
pub mod graph;
pub mod latin;
pub mod matching;
pub mod oracle;
pub mod rainbow;
pub mod robust;
pub mod seed;

pub use error::{Error, ParseError};
pub use graph::{one_edge_per_colour, to_graph, ColouredBipartiteGraph, Edge, Side, Subpair};
pub use latin::{parse_latin, serialize_latin, validate_latin, Colour, LatinArray};
pub use matching::{verify_rainbow_perfect, RainbowMatching};
