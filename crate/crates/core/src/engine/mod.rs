//! Uncoloured bipartite matching: Hopcroft–Karp, Hall violators and
//! expansion checks.

mod expansion;

pub use expansion::{
    expansion_check, expansion_check_with, find_small_violator, neighbourhood_size,
    ExpansionOptions, ExpansionSpec, ExpansionVerdict, SearchOutcome, EXACT_PART_LIMIT,
};

use std::collections::VecDeque;

use crate::graph::{ColouredBipartiteGraph, Edge, Side};

/// Adjacency from one side of a graph (the left side) to the other, both
/// indexed by original vertex number. Neighbour lists are ascending.
#[derive(Clone, Debug)]
pub struct Bipartite {
    pub left: Vec<usize>,
    pub adj: Vec<Vec<u32>>,
    pub n_right: usize,
}

impl Bipartite {
    pub fn from_graph(graph: &ColouredBipartiteGraph, side: Side) -> Self {
        let size = graph.side_size(side);
        let mut adj = vec![Vec::new(); size];
        for e in graph.edges() {
            adj[e.endpoint(side)].push(e.endpoint(side.other()) as u32);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Bipartite {
            left: graph.part(side),
            adj,
            n_right: graph.side_size(side.other()),
        }
    }

    pub fn from_adjacency(adj: Vec<Vec<u32>>, n_right: usize) -> Self {
        let mut adj = adj;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Bipartite {
            left: (0..adj.len()).collect(),
            adj,
            n_right,
        }
    }
}

/// A matching as mate tables on both sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mates {
    pub left: Vec<Option<u32>>,
    pub right: Vec<Option<u32>>,
}

impl Mates {
    pub fn size(&self) -> usize {
        self.left.iter().filter(|m| m.is_some()).count()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left
            .iter()
            .enumerate()
            .filter_map(|(u, m)| m.map(|v| (u, v as usize)))
    }
}

/// Maximum matching by phase-batched shortest augmenting paths. Vertices and
/// neighbours are tried in ascending order, so the result is deterministic.
pub fn hopcroft_karp(g: &Bipartite) -> Mates {
    let n_left = g.adj.len();
    let mut mate_l: Vec<u32> = vec![u32::MAX; n_left];
    let mut mate_r: Vec<u32> = vec![u32::MAX; g.n_right];
    let mut dist = vec![u32::MAX; n_left];
    let mut queue = VecDeque::new();
    loop {
        // Layer the graph from the free left vertices.
        queue.clear();
        for &u in &g.left {
            if mate_l[u] == u32::MAX {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &g.adj[u] {
                let w = mate_r[v as usize];
                if w == u32::MAX {
                    found = true;
                } else if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; n_left];
        for &u in &g.left {
            if mate_l[u] == u32::MAX {
                augment(g, u, &mut mate_l, &mut mate_r, &mut dist, &mut next);
            }
        }
    }
    let wrap = |m: Vec<u32>| m.into_iter().map(|x| (x != u32::MAX).then_some(x)).collect();
    Mates {
        left: wrap(mate_l),
        right: wrap(mate_r),
    }
}

fn augment(
    g: &Bipartite,
    u: usize,
    mate_l: &mut [u32],
    mate_r: &mut [u32],
    dist: &mut [u32],
    next: &mut [usize],
) -> bool {
    while next[u] < g.adj[u].len() {
        let v = g.adj[u][next[u]] as usize;
        next[u] += 1;
        let w = mate_r[v];
        let ok = if w == u32::MAX {
            true
        } else {
            let w = w as usize;
            dist[w] == dist[u] + 1 && augment(g, w, mate_l, mate_r, dist, next)
        };
        if ok {
            mate_l[u] = v as u32;
            mate_r[v] = u as u32;
            return true;
        }
    }
    dist[u] = u32::MAX;
    false
}

/// Maximum matching of the (uncoloured) graph, returned as graph edges.
pub fn max_matching(graph: &ColouredBipartiteGraph) -> Vec<Edge> {
    let mates = hopcroft_karp(&Bipartite::from_graph(graph, Side::A));
    mates
        .pairs()
        .map(|(a, b)| {
            let colour = graph.edge_colour(a, b).expect("matched pair is an edge");
            Edge::new(a, b, colour)
        })
        .collect()
}

/// A set `S` on `side` with `|N(S)| < |S|`, or `None` when a matching
/// saturating `side` exists. `S` is the set of `side` vertices reachable by
/// alternating paths from unmatched vertices of a maximum matching.
pub fn hall_violator(graph: &ColouredBipartiteGraph, side: Side) -> Option<Vec<usize>> {
    let g = Bipartite::from_graph(graph, side);
    let mates = hopcroft_karp(&g);
    let mut seen_left = vec![false; g.adj.len()];
    let mut seen_right = vec![false; g.n_right];
    let mut queue: VecDeque<usize> = g
        .left
        .iter()
        .copied()
        .filter(|&u| mates.left[u].is_none())
        .collect();
    if queue.is_empty() {
        return None;
    }
    for &u in &queue {
        seen_left[u] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &g.adj[u] {
            let v = v as usize;
            if seen_right[v] {
                continue;
            }
            seen_right[v] = true;
            let w = mates.right[v].expect("maximum matching leaves no augmenting path") as usize;
            if !seen_left[w] {
                seen_left[w] = true;
                queue.push_back(w);
            }
        }
    }
    let s: Vec<usize> = (0..g.adj.len()).filter(|&u| seen_left[u]).collect();
    assert!(
        neighbourhood_size(graph, side, &s) < s.len(),
        "Hall violator failed recomputation"
    );
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::cyclic_latin;

    fn graph(size_a: usize, size_b: usize, pairs: &[(usize, usize)]) -> ColouredBipartiteGraph {
        let edges = pairs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| Edge::new(a, b, i as u32))
            .collect();
        ColouredBipartiteGraph::new(size_a, size_b, pairs.len(), edges).unwrap()
    }

    #[test]
    fn max_matching_examples() {
        let k33 = ColouredBipartiteGraph::from_latin(&cyclic_latin(3));
        assert_eq!(max_matching(&k33).len(), 3);
        let star = graph(1, 3, &[(0, 0), (0, 1), (0, 2)]);
        assert_eq!(max_matching(&star).len(), 1);
        let c6 = graph(3, 3, &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)]);
        assert_eq!(max_matching(&c6).len(), 3);
    }

    #[test]
    fn hall_examples() {
        let k22 = ColouredBipartiteGraph::from_latin(&cyclic_latin(2));
        assert_eq!(hall_violator(&k22, Side::A), None);
        let g = graph(2, 2, &[(0, 0), (1, 0)]);
        assert_eq!(hall_violator(&g, Side::A), Some(vec![0, 1]));
        assert_eq!(hall_violator(&g, Side::B), Some(vec![1]));
    }

    #[test]
    fn needs_augmenting_paths() {
        // Greedy in index order would match 0-0 and block vertex 1.
        let g = graph(3, 3, &[(0, 0), (0, 1), (1, 0), (2, 1), (2, 2)]);
        assert_eq!(max_matching(&g).len(), 3);
    }
}
