//! Rainbow matchings and their verification.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError};
use crate::graph::{ColouredBipartiteGraph, Edge};
use crate::latin::Colour;

/// A set of edges, intended to be vertex- and colour-disjoint. The type does
/// not enforce this; [`RainbowMatching::verify`] does.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RainbowMatching {
    edges: Vec<Edge>,
}

/// The first invariant a claimed rainbow matching breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchingDefect {
    RepeatedRow(usize),
    RepeatedColumn(usize),
    RepeatedColour(Colour),
    MissingEdge(Edge),
    NotPerfect { size: usize, part_a: usize, part_b: usize },
}

impl fmt::Display for MatchingDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchingDefect::RepeatedRow(a) => write!(f, "row {a} used twice"),
            MatchingDefect::RepeatedColumn(b) => write!(f, "column {b} used twice"),
            MatchingDefect::RepeatedColour(c) => write!(f, "colour {c} used twice"),
            MatchingDefect::MissingEdge(e) => write!(f, "edge {e:?} is not in the graph"),
            MatchingDefect::NotPerfect {
                size,
                part_a,
                part_b,
            } => write!(f, "{size} edges do not saturate parts of size {part_a} and {part_b}"),
        }
    }
}

impl RainbowMatching {
    pub fn new(edges: Vec<Edge>) -> Self {
        RainbowMatching { edges }
    }

    pub fn empty() -> Self {
        RainbowMatching::default()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<Edge> {
        self.edges
    }

    pub fn push(&mut self, e: Edge) {
        self.edges.push(e);
    }

    pub fn colours(&self) -> impl Iterator<Item = Colour> + '_ {
        self.edges.iter().map(|e| e.colour)
    }

    /// Edges sorted by row, which is how matchings are printed.
    pub fn sorted(mut self) -> Self {
        self.edges.sort_unstable();
        self
    }

    /// Union of several matchings (no checks).
    pub fn union<'a>(parts: impl IntoIterator<Item = &'a RainbowMatching>) -> Self {
        RainbowMatching {
            edges: parts.into_iter().flat_map(|m| m.edges.iter().copied()).collect(),
        }
    }

    /// Checks vertex- and colour-disjointness only.
    pub fn check_disjoint(&self) -> Result<(), MatchingDefect> {
        let mut rows = HashSet::with_capacity(self.edges.len());
        let mut cols = HashSet::with_capacity(self.edges.len());
        let mut colours = HashSet::with_capacity(self.edges.len());
        for e in &self.edges {
            if !rows.insert(e.a) {
                return Err(MatchingDefect::RepeatedRow(e.a()));
            }
            if !cols.insert(e.b) {
                return Err(MatchingDefect::RepeatedColumn(e.b()));
            }
            if !colours.insert(e.colour) {
                return Err(MatchingDefect::RepeatedColour(e.colour));
            }
        }
        Ok(())
    }

    /// Checks the rainbow-matching invariants against `graph`.
    pub fn verify(&self, graph: &ColouredBipartiteGraph) -> Result<(), MatchingDefect> {
        self.check_disjoint()?;
        if let Some(e) = self.edges.iter().find(|e| !graph.has_edge(e)) {
            return Err(MatchingDefect::MissingEdge(*e));
        }
        Ok(())
    }

    /// Like [`RainbowMatching::verify`], and additionally requires that both
    /// parts of `graph` are saturated.
    pub fn verify_perfect(&self, graph: &ColouredBipartiteGraph) -> Result<(), MatchingDefect> {
        self.verify(graph)?;
        let part_a = graph.part_a().len();
        let part_b = graph.part_b().len();
        if self.edges.len() != part_a || self.edges.len() != part_b {
            return Err(MatchingDefect::NotPerfect {
                size: self.edges.len(),
                part_a,
                part_b,
            });
        }
        Ok(())
    }
}

/// True iff `m` is a rainbow matching of `graph` saturating both parts.
pub fn verify_rainbow_perfect(graph: &ColouredBipartiteGraph, m: &RainbowMatching) -> bool {
    m.verify_perfect(graph).is_ok()
}

#[derive(Serialize, Deserialize)]
struct Record {
    row: usize,
    col: usize,
    colour: Colour,
}

/// Serializes a matching as one JSON list of `{row, col, colour}` records
/// followed by the verdict line `RAINBOW-PERFECT: yes|no`.
pub fn serialize_matching(m: &RainbowMatching, rainbow_perfect: bool) -> String {
    let mut edges = m.edges.clone();
    edges.sort_unstable();
    let records: Vec<Record> = edges
        .iter()
        .map(|e| Record {
            row: e.a(),
            col: e.b(),
            colour: e.colour,
        })
        .collect();
    let list = serde_json::to_string(&records).expect("records serialize");
    format!(
        "{list}\nRAINBOW-PERFECT: {}\n",
        if rainbow_perfect { "yes" } else { "no" }
    )
}

/// Reads the format written by [`serialize_matching`]; the verdict line is
/// optional and ignored (verdicts are always recomputed).
pub fn parse_matching(text: &str) -> Result<RainbowMatching, Error> {
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with("RAINBOW-PERFECT:"))
        .collect::<Vec<_>>()
        .join("\n");
    let records: Vec<Record> =
        serde_json::from_str(&body).map_err(|e| ParseError::Matching(e.to_string()))?;
    Ok(RainbowMatching::new(
        records
            .into_iter()
            .map(|r| Edge::new(r.row, r.col, r.colour))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::LatinArray;

    fn graph(rows: &[Vec<Colour>]) -> ColouredBipartiteGraph {
        ColouredBipartiteGraph::from_latin(&LatinArray::from_rows(rows).unwrap())
    }

    #[test]
    fn z2_diagonal_repeats_colour() {
        let g = graph(&[vec![0, 1], vec![1, 0]]);
        let m = RainbowMatching::new(vec![Edge::new(0, 0, 0), Edge::new(1, 1, 0)]);
        assert!(!verify_rainbow_perfect(&g, &m));
        assert_eq!(m.verify(&g), Err(MatchingDefect::RepeatedColour(0)));
    }

    #[test]
    fn single_cell_is_perfect() {
        let g = graph(&[vec![0]]);
        assert!(verify_rainbow_perfect(
            &g,
            &RainbowMatching::new(vec![Edge::new(0, 0, 0)])
        ));
    }

    #[test]
    fn three_colour_2x2() {
        let g = graph(&[vec![0, 1], vec![1, 2]]);
        let m = RainbowMatching::new(vec![Edge::new(0, 0, 0), Edge::new(1, 1, 2)]);
        assert!(verify_rainbow_perfect(&g, &m));
    }

    #[test]
    fn missing_edge_and_wrong_colour() {
        let g = graph(&[vec![0, 1], vec![1, 2]]);
        let wrong = RainbowMatching::new(vec![Edge::new(0, 0, 1)]);
        assert!(matches!(wrong.verify(&g), Err(MatchingDefect::MissingEdge(_))));
        let partial = RainbowMatching::new(vec![Edge::new(0, 0, 0)]);
        assert!(partial.verify(&g).is_ok());
        assert!(!verify_rainbow_perfect(&g, &partial));
    }

    #[test]
    fn matching_text_round_trip() {
        let m = RainbowMatching::new(vec![Edge::new(1, 1, 2), Edge::new(0, 0, 0)]);
        let text = serialize_matching(&m, true);
        assert_eq!(
            text,
            "[{\"row\":0,\"col\":0,\"colour\":0},{\"row\":1,\"col\":1,\"colour\":2}]\nRAINBOW-PERFECT: yes\n"
        );
        assert_eq!(parse_matching(&text).unwrap(), m.sorted());
        assert!(parse_matching("not json").is_err());
    }
}
