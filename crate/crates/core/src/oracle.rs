//! Exact ground truth at small scale.
//!
//! Two independent transversal counters (row backtracking and plain
//! permutation enumeration) and a branch-and-bound maximum rainbow matching.

use crate::error::Error;
use crate::graph::{ColouredBipartiteGraph, Edge};
use crate::latin::LatinArray;
use crate::matching::RainbowMatching;

/// Largest order accepted by [`count_transversals_exhaustive`].
pub const EXHAUSTIVE_MAX_ORDER: usize = 8;

/// Default cap on the A-part size for [`max_rainbow_matching_exact`].
pub const MAX_RAINBOW_EXACT_PART: usize = 12;

struct Backtrack<'a> {
    array: &'a LatinArray,
    /// Column occupancy, 64 columns per word.
    col_used: Vec<u64>,
    colour_used: Vec<bool>,
    chosen: Vec<usize>,
}

impl<'a> Backtrack<'a> {
    fn new(array: &'a LatinArray) -> Self {
        Backtrack {
            array,
            col_used: vec![0; array.order().div_ceil(64)],
            colour_used: vec![false; array.colour_count()],
            chosen: Vec::with_capacity(array.order()),
        }
    }

    /// Visits transversals in lexicographic order of their column sequence;
    /// `visit` returns false to stop the search.
    fn run(&mut self, row: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let n = self.array.order();
        if row == n {
            return visit(&self.chosen);
        }
        for col in 0..n {
            let (word, bit) = (col / 64, 1u64 << (col % 64));
            if self.col_used[word] & bit != 0 {
                continue;
            }
            let colour = self.array.get(row, col) as usize;
            if self.colour_used[colour] {
                continue;
            }
            self.col_used[word] |= bit;
            self.colour_used[colour] = true;
            self.chosen.push(col);
            let keep_going = self.run(row + 1, visit);
            self.chosen.pop();
            self.col_used[word] &= !bit;
            self.colour_used[colour] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }
}

/// Number of transversals, by row-by-row backtracking.
pub fn count_transversals(array: &LatinArray) -> u64 {
    let mut count = 0u64;
    Backtrack::new(array).run(0, &mut |_| {
        count += 1;
        true
    });
    count
}

/// Number of transversals, by checking all `n!` column permutations.
pub fn count_transversals_exhaustive(array: &LatinArray) -> Result<u64, Error> {
    let n = array.order();
    if n > EXHAUSTIVE_MAX_ORDER {
        return Err(Error::TooLarge {
            what: "order",
            value: n,
            limit: EXHAUSTIVE_MAX_ORDER,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut stamp = vec![0u64; array.colour_count()];
    let mut round = 0u64;
    let mut count = 0u64;
    loop {
        round += 1;
        let rainbow = perm.iter().enumerate().all(|(r, &c)| {
            let slot = &mut stamp[array.get(r, c) as usize];
            let fresh = *slot != round;
            *slot = round;
            fresh
        });
        if rainbow {
            count += 1;
        }
        if !next_permutation(&mut perm) {
            return Ok(count);
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// First transversal in lexicographic row order, if any.
pub fn find_transversal_exact(array: &LatinArray) -> Option<RainbowMatching> {
    let mut found = None;
    Backtrack::new(array).run(0, &mut |cols| {
        found = Some(cols.to_vec());
        false
    });
    found.map(|cols| {
        RainbowMatching::new(
            cols.iter()
                .enumerate()
                .map(|(r, &c)| Edge::new(r, c, array.get(r, c)))
                .collect(),
        )
    })
}

/// Maximum rainbow matching by branch and bound over the rows, refusing
/// graphs whose A part exceeds `max_part`.
pub fn max_rainbow_matching_exact_capped(
    graph: &ColouredBipartiteGraph,
    max_part: usize,
) -> Result<RainbowMatching, Error> {
    let rows: Vec<usize> = graph
        .part_a()
        .into_iter()
        .filter(|&a| graph.degree(crate::graph::Side::A, a) > 0)
        .collect();
    if rows.len() > max_part {
        return Err(Error::TooLarge {
            what: "rows with edges",
            value: rows.len(),
            limit: max_part,
        });
    }
    let mut search = MaxSearch {
        graph,
        rows: &rows,
        col_used: vec![false; graph.size_b()],
        colour_used: vec![false; graph.colour_space()],
        current: Vec::new(),
        best: Vec::new(),
        ceiling: rows.len().min(graph.part_b().len()),
    };
    search.run(0);
    Ok(RainbowMatching::new(search.best))
}

/// [`max_rainbow_matching_exact_capped`] with the default cap.
pub fn max_rainbow_matching_exact(graph: &ColouredBipartiteGraph) -> Result<RainbowMatching, Error> {
    max_rainbow_matching_exact_capped(graph, MAX_RAINBOW_EXACT_PART)
}

struct MaxSearch<'a> {
    graph: &'a ColouredBipartiteGraph,
    rows: &'a [usize],
    col_used: Vec<bool>,
    colour_used: Vec<bool>,
    current: Vec<Edge>,
    best: Vec<Edge>,
    ceiling: usize,
}

impl MaxSearch<'_> {
    fn run(&mut self, i: usize) {
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if i == self.rows.len() || self.best.len() == self.ceiling {
            return;
        }
        // Upper bound: every remaining row matched.
        if self.current.len() + (self.rows.len() - i) <= self.best.len() {
            return;
        }
        let graph = self.graph;
        for e in graph.edges_at_a(self.rows[i]) {
            if self.col_used[e.b()] || self.colour_used[e.colour as usize] {
                continue;
            }
            self.col_used[e.b()] = true;
            self.colour_used[e.colour as usize] = true;
            self.current.push(*e);
            self.run(i + 1);
            self.current.pop();
            self.col_used[e.b()] = false;
            self.colour_used[e.colour as usize] = false;
            if self.best.len() == self.ceiling {
                return;
            }
        }
        self.run(i + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cyclic_latin, z2k_table};
    use crate::matching::verify_rainbow_perfect;

    fn distinct(n: usize) -> LatinArray {
        LatinArray::new(n, n * n, (0..(n * n) as u32).collect()).unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_transversals(&z2k_table(1)), 0);
        assert_eq!(count_transversals(&cyclic_latin(1)), 1);
        assert_eq!(count_transversals_exhaustive(&z2k_table(2)).unwrap(), 0);
        let a = LatinArray::from_rows(&[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(count_transversals_exhaustive(&a).unwrap(), 1);
        assert_eq!(count_transversals_exhaustive(&cyclic_latin(1)).unwrap(), 1);
        assert!(count_transversals_exhaustive(&cyclic_latin(9)).is_err());
    }

    #[test]
    fn find_examples() {
        assert!(find_transversal_exact(&z2k_table(3)).is_none());
        let t = find_transversal_exact(&distinct(4)).unwrap();
        assert_eq!(t.len(), 4);
        let c3 = cyclic_latin(3);
        let t = find_transversal_exact(&c3).unwrap();
        assert!(verify_rainbow_perfect(&ColouredBipartiteGraph::from_latin(&c3), &t));
    }

    #[test]
    fn max_rainbow_examples() {
        let z2 = ColouredBipartiteGraph::from_latin(&z2k_table(1));
        assert_eq!(max_rainbow_matching_exact(&z2).unwrap().len(), 1);
        let empty = ColouredBipartiteGraph::empty(3, 3, 1);
        assert_eq!(max_rainbow_matching_exact(&empty).unwrap().len(), 0);
        let c3 = ColouredBipartiteGraph::from_latin(&cyclic_latin(3));
        let m = max_rainbow_matching_exact(&c3).unwrap();
        assert_eq!(m.len(), 3);
        assert!(m.verify(&c3).is_ok());
        // Z_4 has no transversal but a rainbow matching of size 3.
        let z4 = ColouredBipartiteGraph::from_latin(&z2k_table(2));
        assert_eq!(max_rainbow_matching_exact(&z4).unwrap().len(), 3);
        let big = ColouredBipartiteGraph::from_latin(&cyclic_latin(13));
        assert!(max_rainbow_matching_exact(&big).is_err());
    }

    #[test]
    fn permutation_enumeration_covers_all() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(p, vec![3, 2, 1, 0]);
    }
}
