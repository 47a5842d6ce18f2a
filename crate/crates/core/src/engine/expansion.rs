use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::{ColouredBipartiteGraph, Side};
use crate::seed;

/// Parts up to this size are searched exhaustively.
pub const EXACT_PART_LIMIT: usize = 24;

/// The property `|N(S)| >= min(factor * |S|, cap)` for every non-empty `S`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSpec {
    pub factor: f64,
    pub cap: usize,
}

impl ExpansionSpec {
    pub fn new(factor: f64, cap: usize) -> Result<Self, Error> {
        if !(factor > 1.0) || cap == 0 {
            return Err(Error::Parameter(format!(
                "expansion needs factor > 1 and cap > 0, got {factor} and {cap}"
            )));
        }
        Ok(ExpansionSpec { factor, cap })
    }

    /// Factor 2 with cap `floor(2 * part / 3)`, at least 1.
    pub fn for_part(part: usize) -> Self {
        ExpansionSpec {
            factor: 2.0,
            cap: (2 * part / 3).max(1),
        }
    }

    /// Smallest neighbourhood size a set of `s` vertices may have.
    pub fn requirement(&self, s: usize) -> usize {
        (self.factor * s as f64).min(self.cap as f64).ceil() as usize
    }

    /// Sets larger than this inherit the bound from any subset of this size.
    pub fn max_checked_size(&self, part: usize) -> usize {
        ((self.cap as f64 / self.factor).ceil() as usize).min(part)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpansionOptions {
    pub exact_limit: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        ExpansionOptions {
            exact_limit: EXACT_PART_LIMIT,
            restarts: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExpansionVerdict {
    /// `exact` is false when the verdict comes from the local search.
    Holds { exact: bool },
    Violator {
        set: Vec<usize>,
        neighbours: usize,
        required: usize,
    },
}

impl ExpansionVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ExpansionVerdict::Holds { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    NotFound { exact: bool },
    Found(Vec<usize>),
}

/// Number of distinct neighbours of `set` (vertices on `side`).
pub fn neighbourhood_size(graph: &ColouredBipartiteGraph, side: Side, set: &[usize]) -> usize {
    let mut seen = vec![false; graph.side_size(side.other())];
    let mut count = 0;
    for &v in set {
        for e in graph.edges_at(side, v) {
            let w = e.endpoint(side.other());
            if !seen[w] {
                seen[w] = true;
                count += 1;
            }
        }
    }
    count
}

pub fn expansion_check(
    graph: &ColouredBipartiteGraph,
    side: Side,
    spec: ExpansionSpec,
) -> ExpansionVerdict {
    expansion_check_with(graph, side, spec, &ExpansionOptions::default())
}

pub fn expansion_check_with(
    graph: &ColouredBipartiteGraph,
    side: Side,
    spec: ExpansionSpec,
    options: &ExpansionOptions,
) -> ExpansionVerdict {
    let part = graph.part(side).len();
    let max_size = spec.max_checked_size(part);
    match find_small_violator(graph, side, &|s| spec.requirement(s), max_size, options) {
        SearchOutcome::NotFound { exact } => ExpansionVerdict::Holds { exact },
        SearchOutcome::Found(set) => ExpansionVerdict::Violator {
            neighbours: neighbourhood_size(graph, side, &set),
            required: spec.requirement(set.len()),
            set,
        },
    }
}

/// Looks for a non-empty `S` on `side` with `|S| <= max_size` and
/// `|N(S)| < requirement(|S|)`; `requirement` must be non-decreasing. In exact
/// mode the lexicographically least violator is returned. Every returned set
/// is re-verified.
pub fn find_small_violator(
    graph: &ColouredBipartiteGraph,
    side: Side,
    requirement: &dyn Fn(usize) -> usize,
    max_size: usize,
    options: &ExpansionOptions,
) -> SearchOutcome {
    let part = graph.part(side);
    let max_size = max_size.min(part.len());
    if max_size == 0 {
        return SearchOutcome::NotFound { exact: true };
    }
    // Every set has at least as many neighbours as its largest degree.
    let min_degree = part.iter().map(|&v| graph.degree(side, v)).min().unwrap_or(0);
    if min_degree >= requirement(max_size) {
        return SearchOutcome::NotFound { exact: true };
    }
    let local = Local::new(graph, side, &part);
    let found = if part.len() <= options.exact_limit {
        local.exact(requirement, max_size)
    } else {
        local.local_search(requirement, max_size, options)
    };
    match found {
        Some(idx) => {
            let set: Vec<usize> = idx.into_iter().map(|i| part[i]).collect();
            assert!(
                neighbourhood_size(graph, side, &set) < requirement(set.len()),
                "violator failed recomputation"
            );
            SearchOutcome::Found(set)
        }
        None => SearchOutcome::NotFound {
            exact: part.len() <= options.exact_limit,
        },
    }
}

/// The part re-indexed as `0..m`, with neighbours re-indexed densely.
struct Local {
    adj: Vec<Vec<u32>>,
    width: usize,
}

impl Local {
    fn new(graph: &ColouredBipartiteGraph, side: Side, part: &[usize]) -> Self {
        let mut id = vec![u32::MAX; graph.side_size(side.other())];
        let mut width = 0usize;
        let adj = part
            .iter()
            .map(|&v| {
                graph
                    .edges_at(side, v)
                    .map(|e| {
                        let w = e.endpoint(side.other());
                        if id[w] == u32::MAX {
                            id[w] = width as u32;
                            width += 1;
                        }
                        id[w]
                    })
                    .collect()
            })
            .collect();
        Local { adj, width }
    }

    fn exact(&self, requirement: &dyn Fn(usize) -> usize, max_size: usize) -> Option<Vec<usize>> {
        let words = self.width.div_ceil(64).max(1);
        let masks: Vec<Vec<u64>> = self
            .adj
            .iter()
            .map(|list| {
                let mut m = vec![0u64; words];
                for &w in list {
                    m[w as usize / 64] |= 1 << (w % 64);
                }
                m
            })
            .collect();
        let mut search = Subsets {
            masks: &masks,
            requirement,
            max_size,
            ceiling: requirement(max_size),
            unions: vec![vec![0u64; words]; max_size + 1],
            chosen: Vec::with_capacity(max_size),
        };
        search.run(0, 0).then_some(search.chosen)
    }

    /// Seeded steepest descent on `|N(S)| - requirement(|S|)` over single
    /// additions and removals.
    fn local_search(
        &self,
        requirement: &dyn Fn(usize) -> usize,
        max_size: usize,
        options: &ExpansionOptions,
    ) -> Option<Vec<usize>> {
        let m = self.adj.len();
        let mut rng = seed::rng(options.seed);
        let mut count = vec![0u32; self.width];
        let mut in_set = vec![false; m];
        let lowest = (0..m).min_by_key(|&v| self.adj[v].len()).unwrap();
        for restart in 0..options.restarts.max(1) {
            count.iter_mut().for_each(|c| *c = 0);
            in_set.iter_mut().for_each(|x| *x = false);
            let start: Vec<usize> = if restart == 0 {
                vec![lowest]
            } else {
                let size = rng.gen_range(1..=max_size);
                sample(&mut rng, m, size).into_vec()
            };
            let mut size = 0usize;
            let mut reach = 0usize;
            for v in start {
                reach += self.flip(v, &mut in_set, &mut count, &mut size);
            }
            loop {
                let score = reach as i64 - requirement(size) as i64;
                if score < 0 {
                    let mut set: Vec<usize> = (0..m).filter(|&v| in_set[v]).collect();
                    set.sort_unstable();
                    return Some(set);
                }
                let mut best: Option<(i64, usize)> = None;
                for v in 0..m {
                    let candidate = if in_set[v] {
                        if size == 1 {
                            continue;
                        }
                        let lost = self.adj[v].iter().filter(|&&w| count[w as usize] == 1).count();
                        (reach - lost) as i64 - requirement(size - 1) as i64
                    } else {
                        if size == max_size {
                            continue;
                        }
                        let gained = self.adj[v].iter().filter(|&&w| count[w as usize] == 0).count();
                        (reach + gained) as i64 - requirement(size + 1) as i64
                    };
                    if best.is_none_or(|(s, _)| candidate < s) {
                        best = Some((candidate, v));
                    }
                }
                match best {
                    Some((s, v)) if s < score => {
                        let delta = self.flip(v, &mut in_set, &mut count, &mut size);
                        reach = (reach as i64 + delta as i64 * if in_set[v] { 1 } else { -1 })
                            as usize;
                    }
                    _ => break,
                }
            }
        }
        None
    }

    /// Toggles `v` and returns how many neighbourhood vertices changed.
    fn flip(&self, v: usize, in_set: &mut [bool], count: &mut [u32], size: &mut usize) -> usize {
        let mut changed = 0;
        if in_set[v] {
            in_set[v] = false;
            *size -= 1;
            for &w in &self.adj[v] {
                count[w as usize] -= 1;
                if count[w as usize] == 0 {
                    changed += 1;
                }
            }
        } else {
            in_set[v] = true;
            *size += 1;
            for &w in &self.adj[v] {
                if count[w as usize] == 0 {
                    changed += 1;
                }
                count[w as usize] += 1;
            }
        }
        changed
    }
}

struct Subsets<'a> {
    masks: &'a [Vec<u64>],
    requirement: &'a dyn Fn(usize) -> usize,
    max_size: usize,
    ceiling: usize,
    unions: Vec<Vec<u64>>,
    chosen: Vec<usize>,
}

impl Subsets<'_> {
    /// Depth-first in lexicographic order; a branch is cut once its
    /// neighbourhood already meets the largest requirement.
    fn run(&mut self, from: usize, depth: usize) -> bool {
        for i in from..self.masks.len() {
            let (lower, upper) = self.unions.split_at_mut(depth + 1);
            let mut reach = 0;
            for ((out, a), b) in upper[0].iter_mut().zip(&lower[depth]).zip(&self.masks[i]) {
                *out = a | b;
                reach += out.count_ones() as usize;
            }
            self.chosen.push(i);
            if reach < (self.requirement)(depth + 1) {
                return true;
            }
            if depth + 1 < self.max_size && reach < self.ceiling && self.run(i + 1, depth + 1) {
                return true;
            }
            self.chosen.pop();
        }
        false
    }
}
