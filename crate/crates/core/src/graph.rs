//! Properly edge-coloured bipartite graphs.
//!
//! Vertices are `(side, index)` pairs: rows of a Latin array are side A and
//! columns are side B. Every graph carries the full index range of both
//! sides plus a membership mask, so the subgraphs built by the pipeline keep
//! the original row and column numbers.

use std::fmt;

use rand::Rng;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::latin::{Colour, LatinArray};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// A coloured edge between row `a` and column `b`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub colour: Colour,
}

impl Edge {
    pub fn new(a: usize, b: usize, colour: Colour) -> Self {
        Edge {
            a: a as u32,
            b: b as u32,
            colour,
        }
    }

    pub fn a(&self) -> usize {
        self.a as usize
    }

    pub fn b(&self) -> usize {
        self.b as usize
    }

    pub fn endpoint(&self, side: Side) -> usize {
        match side {
            Side::A => self.a(),
            Side::B => self.b(),
        }
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}:{})", self.a, self.b, self.colour)
    }
}

/// A pair of vertex subsets, one per side. Both lists are sorted and free of
/// duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subpair {
    #[serde(rename = "a")]
    pub part_a: Vec<usize>,
    #[serde(rename = "b")]
    pub part_b: Vec<usize>,
}

impl Subpair {
    pub fn new(mut part_a: Vec<usize>, mut part_b: Vec<usize>) -> Self {
        part_a.sort_unstable();
        part_a.dedup();
        part_b.sort_unstable();
        part_b.dedup();
        Subpair { part_a, part_b }
    }

    pub fn full(size_a: usize, size_b: usize) -> Self {
        Subpair {
            part_a: (0..size_a).collect(),
            part_b: (0..size_b).collect(),
        }
    }

    pub fn part(&self, side: Side) -> &[usize] {
        match side {
            Side::A => &self.part_a,
            Side::B => &self.part_b,
        }
    }

    pub fn len_a(&self) -> usize {
        self.part_a.len()
    }

    pub fn len_b(&self) -> usize {
        self.part_b.len()
    }

    pub fn is_balanced(&self) -> bool {
        self.part_a.len() == self.part_b.len()
    }

    pub fn mask_a(&self, size: usize) -> Vec<bool> {
        mask(&self.part_a, size)
    }

    pub fn mask_b(&self, size: usize) -> Vec<bool> {
        mask(&self.part_b, size)
    }

    pub fn check_range(&self, size_a: usize, size_b: usize) -> Result<(), Error> {
        if self.part_a.last().is_some_and(|&a| a >= size_a)
            || self.part_b.last().is_some_and(|&b| b >= size_b)
        {
            return Err(Error::InvalidGraph(format!(
                "subpair index outside {size_a}x{size_b}"
            )));
        }
        Ok(())
    }
}

pub(crate) fn mask(part: &[usize], size: usize) -> Vec<bool> {
    let mut m = vec![false; size];
    for &v in part {
        m[v] = true;
    }
    m
}

/// Properly edge-coloured bipartite graph with adjacency indices by vertex
/// and by colour. Immutable once built.
#[derive(Clone)]
pub struct ColouredBipartiteGraph {
    size_a: usize,
    size_b: usize,
    colour_space: usize,
    in_a: Vec<bool>,
    in_b: Vec<bool>,
    /// Sorted by `(a, b)`.
    edges: Vec<Edge>,
    a_start: Vec<u32>,
    /// Edge ids grouped by `b`, ascending `a` within a group.
    b_edges: Vec<u32>,
    b_start: Vec<u32>,
    /// Edge ids grouped by colour.
    colour_edges: Vec<u32>,
    colour_start: Vec<u32>,
}

impl ColouredBipartiteGraph {
    /// Builds a graph on `size_a + size_b` vertices, all present, checking
    /// properness, ranges and parallel edges.
    pub fn new(
        size_a: usize,
        size_b: usize,
        colour_space: usize,
        edges: Vec<Edge>,
    ) -> Result<Self, Error> {
        Self::with_parts(
            size_a,
            size_b,
            colour_space,
            vec![true; size_a],
            vec![true; size_b],
            edges,
        )
    }

    /// Like [`ColouredBipartiteGraph::new`] but with explicit vertex sets;
    /// every edge must join present vertices.
    pub fn with_parts(
        size_a: usize,
        size_b: usize,
        colour_space: usize,
        in_a: Vec<bool>,
        in_b: Vec<bool>,
        mut edges: Vec<Edge>,
    ) -> Result<Self, Error> {
        if in_a.len() != size_a || in_b.len() != size_b {
            return Err(Error::InvalidGraph("membership mask length".into()));
        }
        for e in &edges {
            if e.a() >= size_a || e.b() >= size_b || e.colour as usize >= colour_space {
                return Err(Error::InvalidGraph(format!("edge {e:?} out of range")));
            }
            if !in_a[e.a()] || !in_b[e.b()] {
                return Err(Error::InvalidGraph(format!(
                    "edge {e:?} touches an absent vertex"
                )));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
            return Err(Error::InvalidGraph(format!(
                "parallel edges {:?} and {:?}",
                w[0], w[1]
            )));
        }
        let g = Self::build(size_a, size_b, colour_space, in_a, in_b, edges);
        g.check_proper()?;
        Ok(g)
    }

    /// Assembles the indices. `edges` must already be sorted, in range and
    /// free of parallel edges.
    fn build(
        size_a: usize,
        size_b: usize,
        colour_space: usize,
        in_a: Vec<bool>,
        in_b: Vec<bool>,
        edges: Vec<Edge>,
    ) -> Self {
        let a_start = offsets(size_a, edges.iter().map(|e| e.a()));
        let b_start = offsets(size_b, edges.iter().map(|e| e.b()));
        let colour_start = offsets(colour_space, edges.iter().map(|e| e.colour as usize));
        let b_edges = bucket(&b_start, edges.iter().map(|e| e.b()));
        let colour_edges = bucket(&colour_start, edges.iter().map(|e| e.colour as usize));
        ColouredBipartiteGraph {
            size_a,
            size_b,
            colour_space,
            in_a,
            in_b,
            edges,
            a_start,
            b_edges,
            b_start,
            colour_edges,
            colour_start,
        }
    }

    fn check_proper(&self) -> Result<(), Error> {
        let mut seen_a = vec![u32::MAX; self.size_a];
        let mut seen_b = vec![u32::MAX; self.size_b];
        for c in 0..self.colour_space {
            for e in self.colour_class(c as Colour) {
                if seen_a[e.a()] == e.colour || seen_b[e.b()] == e.colour {
                    return Err(Error::InvalidGraph(format!(
                        "colour {} repeats at a vertex of {e:?}",
                        e.colour
                    )));
                }
                seen_a[e.a()] = e.colour;
                seen_b[e.b()] = e.colour;
            }
        }
        Ok(())
    }

    /// The complete bipartite graph of a Latin array: edge `(r, c)` has
    /// colour `grid[r][c]`.
    pub fn from_latin(array: &LatinArray) -> Self {
        let n = array.order();
        let edges = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| Edge::new(r, c, array.get(r, c)))
            .collect();
        Self::build(n, n, array.colour_count(), vec![true; n], vec![true; n], edges)
    }

    pub fn empty(size_a: usize, size_b: usize, colour_space: usize) -> Self {
        Self::build(
            size_a,
            size_b,
            colour_space,
            vec![true; size_a],
            vec![true; size_b],
            Vec::new(),
        )
    }

    pub fn size_a(&self) -> usize {
        self.size_a
    }

    pub fn size_b(&self) -> usize {
        self.size_b
    }

    pub fn colour_space(&self) -> usize {
        self.colour_space
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains_a(&self, a: usize) -> bool {
        self.in_a[a]
    }

    pub fn contains_b(&self, b: usize) -> bool {
        self.in_b[b]
    }

    pub fn contains(&self, side: Side, v: usize) -> bool {
        match side {
            Side::A => self.in_a[v],
            Side::B => self.in_b[v],
        }
    }

    pub fn part_a(&self) -> Vec<usize> {
        (0..self.size_a).filter(|&a| self.in_a[a]).collect()
    }

    pub fn part_b(&self) -> Vec<usize> {
        (0..self.size_b).filter(|&b| self.in_b[b]).collect()
    }

    pub fn part(&self, side: Side) -> Vec<usize> {
        match side {
            Side::A => self.part_a(),
            Side::B => self.part_b(),
        }
    }

    pub fn parts(&self) -> Subpair {
        Subpair {
            part_a: self.part_a(),
            part_b: self.part_b(),
        }
    }

    pub fn side_size(&self, side: Side) -> usize {
        match side {
            Side::A => self.size_a,
            Side::B => self.size_b,
        }
    }

    /// Edges at row `a`, ascending by column.
    pub fn edges_at_a(&self, a: usize) -> &[Edge] {
        let (lo, hi) = (self.a_start[a] as usize, self.a_start[a + 1] as usize);
        &self.edges[lo..hi]
    }

    /// Edges at column `b`, ascending by row.
    pub fn edges_at_b(&self, b: usize) -> impl ExactSizeIterator<Item = &Edge> + '_ {
        let (lo, hi) = (self.b_start[b] as usize, self.b_start[b + 1] as usize);
        self.b_edges[lo..hi].iter().map(|&i| &self.edges[i as usize])
    }

    /// Edges at a vertex as a boxed iterator; convenient for side-generic
    /// code off the hot paths.
    pub fn edges_at(&self, side: Side, v: usize) -> Box<dyn ExactSizeIterator<Item = &Edge> + '_> {
        match side {
            Side::A => Box::new(self.edges_at_a(v).iter()),
            Side::B => Box::new(self.edges_at_b(v)),
        }
    }

    pub fn degree(&self, side: Side, v: usize) -> usize {
        match side {
            Side::A => (self.a_start[v + 1] - self.a_start[v]) as usize,
            Side::B => (self.b_start[v + 1] - self.b_start[v]) as usize,
        }
    }

    /// Minimum degree over the present vertices of both sides (0 for a graph
    /// without vertices).
    pub fn min_degree(&self) -> usize {
        let a = (0..self.size_a)
            .filter(|&a| self.in_a[a])
            .map(|a| self.degree(Side::A, a));
        let b = (0..self.size_b)
            .filter(|&b| self.in_b[b])
            .map(|b| self.degree(Side::B, b));
        a.chain(b).min().unwrap_or(0)
    }

    pub fn colour_class(&self, colour: Colour) -> impl ExactSizeIterator<Item = &Edge> + '_ {
        let c = colour as usize;
        let (lo, hi) = (self.colour_start[c] as usize, self.colour_start[c + 1] as usize);
        self.colour_edges[lo..hi]
            .iter()
            .map(|&i| &self.edges[i as usize])
    }

    pub fn colour_multiplicity(&self, colour: Colour) -> usize {
        let c = colour as usize;
        (self.colour_start[c + 1] - self.colour_start[c]) as usize
    }

    /// Colours with at least one edge, ascending.
    pub fn colours_present(&self) -> Vec<Colour> {
        (0..self.colour_space)
            .filter(|&c| self.colour_start[c + 1] > self.colour_start[c])
            .map(|c| c as Colour)
            .collect()
    }

    pub fn edge_colour(&self, a: usize, b: usize) -> Option<Colour> {
        let row = self.edges_at_a(a);
        row.binary_search_by_key(&(b as u32), |e| e.b)
            .ok()
            .map(|i| row[i].colour)
    }

    pub fn has_edge(&self, e: &Edge) -> bool {
        self.edge_colour(e.a(), e.b()) == Some(e.colour)
    }

    /// Keeps the edges satisfying `keep`, with the same vertex sets.
    pub fn filter_edges(&self, mut keep: impl FnMut(&Edge) -> bool) -> Self {
        let edges = self.edges.iter().copied().filter(|e| keep(e)).collect();
        Self::build(
            self.size_a,
            self.size_b,
            self.colour_space,
            self.in_a.clone(),
            self.in_b.clone(),
            edges,
        )
    }

    /// The induced subgraph on `pair`. Vertices of `pair` absent from this
    /// graph stay absent.
    pub fn induced(&self, pair: &Subpair) -> Self {
        let mut in_a = pair.mask_a(self.size_a);
        let mut in_b = pair.mask_b(self.size_b);
        for (m, &p) in in_a.iter_mut().zip(&self.in_a) {
            *m &= p;
        }
        for (m, &p) in in_b.iter_mut().zip(&self.in_b) {
            *m &= p;
        }
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|e| in_a[e.a()] && in_b[e.b()])
            .collect();
        Self::build(self.size_a, self.size_b, self.colour_space, in_a, in_b, edges)
    }

    /// Removes the given vertices (and their edges).
    pub fn without_vertices(&self, drop_a: &[usize], drop_b: &[usize]) -> Self {
        let mut in_a = self.in_a.clone();
        let mut in_b = self.in_b.clone();
        for &a in drop_a {
            in_a[a] = false;
        }
        for &b in drop_b {
            in_b[b] = false;
        }
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|e| in_a[e.a()] && in_b[e.b()])
            .collect();
        Self::build(self.size_a, self.size_b, self.colour_space, in_a, in_b, edges)
    }

    /// Builds a subgraph from a subset of this graph's edges. The caller
    /// guarantees every edge belongs to `self`; invariants are inherited.
    pub(crate) fn from_subset(&self, edges: Vec<Edge>) -> Self {
        let mut edges = edges;
        edges.sort_unstable();
        Self::build(
            self.size_a,
            self.size_b,
            self.colour_space,
            self.in_a.clone(),
            self.in_b.clone(),
            edges,
        )
    }
}

impl fmt::Debug for ColouredBipartiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ColouredBipartiteGraph")
            .field("size_a", &self.size_a)
            .field("size_b", &self.size_b)
            .field("colours", &self.colour_space)
            .field("edges", &self.edges.len())
            .finish()
    }
}

/// CSR offsets: `start[k]..start[k + 1]` spans the items with key `k`.
fn offsets(len: usize, keys: impl Iterator<Item = usize>) -> Vec<u32> {
    let mut start = vec![0u32; len + 1];
    for k in keys {
        start[k + 1] += 1;
    }
    for i in 0..len {
        start[i + 1] += start[i];
    }
    start
}

fn bucket(start: &[u32], keys: impl Iterator<Item = usize>) -> Vec<u32> {
    let mut fill: Vec<u32> = start[..start.len() - 1].to_vec();
    let mut out = vec![0u32; *start.last().unwrap_or(&0) as usize];
    for (i, k) in keys.enumerate() {
        out[fill[k] as usize] = i as u32;
        fill[k] += 1;
    }
    out
}

/// Converts a validated array to its coloured `K_{n,n}`. Rejects invalid
/// arrays built with [`LatinArray::from_grid_unchecked`].
pub fn to_graph(array: &LatinArray) -> Result<ColouredBipartiteGraph, Error> {
    let report = crate::latin::validate_latin(array);
    if !report.is_ok() {
        return Err(Error::InvalidArray(report.violations));
    }
    Ok(ColouredBipartiteGraph::from_latin(array))
}

/// One uniformly chosen edge from every non-empty colour class, reproducible
/// from `seed`. Classes are visited in colour order.
pub fn one_edge_per_colour(graph: &ColouredBipartiteGraph, seed: u64) -> ColouredBipartiteGraph {
    let mut rng = crate::seed::rng(seed);
    let mut picked = Vec::new();
    for c in 0..graph.colour_space() as Colour {
        let class = graph.colour_class(c);
        let m = class.len();
        if m > 0 {
            let i = rng.gen_range(0..m);
            picked.push(*graph.colour_class(c).nth(i).unwrap());
        }
    }
    graph.from_subset(picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::cyclic_latin;

    #[test]
    fn one_edge_per_colour_examples() {
        let g = to_graph(&cyclic_latin(3)).unwrap();
        for seed in 0..20 {
            let h = one_edge_per_colour(&g, seed);
            assert_eq!(h.edge_count(), 3);
            assert_eq!(h.colours_present(), vec![0, 1, 2]);
            assert!(h.edges().iter().all(|e| g.has_edge(e)));
            assert_eq!(h.edges(), one_edge_per_colour(&g, seed).edges());
        }
        let distinct = LatinArray::new(3, 9, (0..9).collect()).unwrap();
        let g = to_graph(&distinct).unwrap();
        assert_eq!(one_edge_per_colour(&g, 5).edges(), g.edges());
    }

    #[test]
    fn z2_graph() {
        let a = LatinArray::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        let g = to_graph(&a).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.colours_present(), vec![0, 1]);
        assert_eq!(g.edge_colour(1, 0), Some(1));
    }

    #[test]
    fn single_cell_graph() {
        let g = to_graph(&LatinArray::new(1, 1, vec![0]).unwrap()).unwrap();
        assert_eq!(g.edges(), &[Edge::new(0, 0, 0)]);
    }

    #[test]
    fn cyclic3_colour_classes_are_perfect_matchings() {
        let g = to_graph(&cyclic_latin(3)).unwrap();
        assert_eq!(g.edge_count(), 9);
        for c in 0..3 {
            let class: Vec<_> = g.colour_class(c).copied().collect();
            assert_eq!(class.len(), 3);
            let mut rows: Vec<_> = class.iter().map(|e| e.a).collect();
            let mut cols: Vec<_> = class.iter().map(|e| e.b).collect();
            rows.sort();
            cols.sort();
            assert_eq!(rows, vec![0, 1, 2]);
            assert_eq!(cols, vec![0, 1, 2]);
        }
    }

    #[test]
    fn invalid_array_rejected() {
        let bad = LatinArray::from_grid_unchecked(2, 2, vec![0, 0, 1, 0]);
        assert!(to_graph(&bad).is_err());
    }

    #[test]
    fn constructor_rejects_improper_and_parallel() {
        let improper = vec![Edge::new(0, 0, 0), Edge::new(0, 1, 0)];
        assert!(ColouredBipartiteGraph::new(2, 2, 1, improper).is_err());
        let parallel = vec![Edge::new(0, 0, 0), Edge::new(0, 0, 1)];
        assert!(ColouredBipartiteGraph::new(2, 2, 2, parallel).is_err());
        let ok = vec![Edge::new(0, 0, 0), Edge::new(1, 1, 0)];
        assert!(ColouredBipartiteGraph::new(2, 2, 1, ok).is_ok());
    }

    #[test]
    fn indices_agree_with_edge_list() {
        let g = to_graph(&cyclic_latin(5)).unwrap();
        let sub = g.induced(&Subpair::new(vec![0, 2, 4], vec![1, 2]));
        assert_eq!(sub.edge_count(), 6);
        for e in sub.edges() {
            assert!(sub.edges_at_a(e.a()).contains(e));
            assert!(sub.edges_at_b(e.b()).any(|x| x == e));
            assert!(sub.colour_class(e.colour).any(|x| x == e));
        }
        assert_eq!(sub.part_a(), vec![0, 2, 4]);
        assert_eq!(sub.min_degree(), 2);
        assert!(!sub.contains_b(0));
    }
}
