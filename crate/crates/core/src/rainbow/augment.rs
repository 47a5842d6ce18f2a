//! Rainbow matching growth: greedy start, reachability sets and the
//! trace-back repair that turns an intersection into a larger matching.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::graph::{mask, ColouredBipartiteGraph, Edge, Side};
use crate::latin::Colour;
use crate::matching::{MatchingDefect, RainbowMatching};
use crate::seed;

/// Maximal rainbow matching: A vertices in a seeded order, each taking its
/// lowest-index admissible edge.
pub fn greedy_rainbow(graph: &ColouredBipartiteGraph, seed: u64) -> RainbowMatching {
    let mut order = graph.part_a();
    order.shuffle(&mut seed::rng(seed));
    let mut used_b = vec![false; graph.size_b()];
    let mut used_c = vec![false; graph.colour_space()];
    let mut m = RainbowMatching::empty();
    for a in order {
        let pick = graph
            .edges_at_a(a)
            .iter()
            .find(|e| !used_b[e.b()] && !used_c[e.colour as usize]);
        if let Some(&e) = pick {
            used_b[e.b()] = true;
            used_c[e.colour as usize] = true;
            m.push(e);
        }
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReachTermination {
    Intersection(Edge),
    Stalled,
    StepCap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReachStep {
    pub step: usize,
    pub added_a: Vec<Edge>,
    pub added_b: Vec<Edge>,
}

/// Timestamp of colours outside the pool.
const ABSENT: u32 = u32::MAX;

/// Reachability sets over the edges of a rainbow matching. Phase A of step
/// `i` has stamp `2i - 1` and phase B stamp `2i`; colours initially in the
/// pool have stamp 0.
#[derive(Clone, Debug)]
pub struct ReachState {
    /// The matching, sorted.
    pub edges: Vec<Edge>,
    /// Stamp at which each edge joined R^A.
    pub stamp_a: Vec<Option<u32>>,
    pub stamp_b: Vec<Option<u32>>,
    colour_stamp: Vec<u32>,
    /// Colours added to the pool, in insertion order.
    pub added: Vec<Colour>,
    pub steps: Vec<ReachStep>,
    pub terminated: ReachTermination,
    pub a0: Vec<usize>,
    pub b0: Vec<usize>,
    pub threshold: usize,
}

impl ReachState {
    pub fn r_a(&self) -> Vec<Edge> {
        self.members(&self.stamp_a)
    }

    pub fn r_b(&self) -> Vec<Edge> {
        self.members(&self.stamp_b)
    }

    fn members(&self, stamps: &[Option<u32>]) -> Vec<Edge> {
        self.edges
            .iter()
            .zip(stamps)
            .filter(|(_, s)| s.is_some())
            .map(|(e, _)| *e)
            .collect()
    }

    pub fn in_pool(&self, c: Colour) -> bool {
        self.colour_stamp[c as usize] != ABSENT
    }

    pub fn stamp(&self, c: Colour) -> Option<u32> {
        let s = self.colour_stamp[c as usize];
        (s != ABSENT).then_some(s)
    }

    /// Strict "earlier" order on pool colours: stamp, then colour id.
    pub fn earlier(&self, c: Colour, other: Colour) -> bool {
        (self.colour_stamp[c as usize], c) < (self.colour_stamp[other as usize], other)
    }

    /// Number of steps started.
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }
}

/// Builds R^A and R^B. Step `i` first adds to R^A every matching edge `uv`
/// not yet in R^A whose B end has at least `threshold` pool-coloured edges
/// into `a0`, then symmetrically for R^B from the A end into `b0`. Stops when
/// the sets meet, when neither phase grows, or after `step_cap` steps.
pub fn build_reach(
    g_star: &ColouredBipartiteGraph,
    m2: &RainbowMatching,
    a0: &[usize],
    b0: &[usize],
    threshold: usize,
    step_cap: usize,
) -> ReachState {
    let threshold = threshold.max(1);
    let edges = m2.clone().sorted().into_edges();
    let mut colour_stamp = vec![0u32; g_star.colour_space()];
    for e in &edges {
        colour_stamp[e.colour as usize] = ABSENT;
    }
    let in_a0 = mask(a0, g_star.size_a());
    let in_b0 = mask(b0, g_star.size_b());
    let mut state = ReachState {
        stamp_a: vec![None; edges.len()],
        stamp_b: vec![None; edges.len()],
        edges,
        colour_stamp,
        added: Vec::new(),
        steps: Vec::new(),
        terminated: ReachTermination::StepCap,
        a0: a0.to_vec(),
        b0: b0.to_vec(),
        threshold,
    };
    for i in 1..=step_cap {
        let mut record = ReachStep {
            step: i,
            added_a: Vec::new(),
            added_b: Vec::new(),
        };
        for side in [Side::A, Side::B] {
            let stamp = 2 * i as u32 - (side == Side::A) as u32;
            // Side A grows R^A from B ends towards A₀.
            let (from, pool) = match side {
                Side::A => (Side::B, &in_a0),
                Side::B => (Side::A, &in_b0),
            };
            let fresh: Vec<usize> = (0..state.edges.len())
                .filter(|&j| state.stamps(side)[j].is_none())
                .filter(|&j| {
                    let v = state.edges[j].endpoint(from);
                    g_star
                        .edges_at(from, v)
                        .filter(|e| pool[e.endpoint(side)] && state.in_pool(e.colour))
                        .take(threshold)
                        .count()
                        >= threshold
                })
                .collect();
            for &j in &fresh {
                state.stamps_mut(side)[j] = Some(stamp);
                let c = state.edges[j].colour as usize;
                if state.colour_stamp[c] == ABSENT {
                    state.colour_stamp[c] = stamp;
                    state.added.push(c as Colour);
                }
                match side {
                    Side::A => record.added_a.push(state.edges[j]),
                    Side::B => record.added_b.push(state.edges[j]),
                }
            }
            let hit = fresh
                .iter()
                .copied()
                .filter(|&j| state.stamps(side.other())[j].is_some())
                .min();
            if let Some(j) = hit {
                state.terminated = ReachTermination::Intersection(state.edges[j]);
                state.steps.push(record);
                return state;
            }
        }
        let stalled = record.added_a.is_empty() && record.added_b.is_empty();
        state.steps.push(record);
        if stalled {
            state.terminated = ReachTermination::Stalled;
            return state;
        }
    }
    state
}

impl ReachState {
    fn stamps(&self, side: Side) -> &[Option<u32>] {
        match side {
            Side::A => &self.stamp_a,
            Side::B => &self.stamp_b,
        }
    }

    fn stamps_mut(&mut self, side: Side) -> &mut [Option<u32>] {
        match side {
            Side::A => &mut self.stamp_a,
            Side::B => &mut self.stamp_b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("reachability did not end in an intersection")]
    NoIntersection,
    #[error("step {step}: no earlier-coloured edge with a fresh endpoint at {side:?} vertex {vertex}")]
    NoFreshEdge {
        step: usize,
        side: Side,
        vertex: usize,
        stamp_bound: u32,
    },
    #[error("repaired matching failed verification: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceResult {
    pub matching: RainbowMatching,
    /// Replacement steps after the initial swap.
    pub steps: usize,
    pub removed: Vec<Edge>,
    pub added: Vec<Edge>,
}

/// Replaces the intersection edge `ab` by `a₀b` and `ab₀` with pool colours
/// stamped before `ab` joined the respective set, then repairs colour clashes:
/// while a new edge shares its colour with a surviving matching edge `a'b'`,
/// that edge is dropped and its end that qualified first takes a new edge
/// into `A₀`/`B₀` whose colour is earlier than the clashing colour. New edges
/// use fresh leftover vertices and distinct colours; among options the
/// earliest colour wins, then the lowest vertex.
pub fn trace_back(
    g_star: &ColouredBipartiteGraph,
    m2: &RainbowMatching,
    reach: &ReachState,
) -> Result<TraceResult, TraceError> {
    let ReachTermination::Intersection(ab) = reach.terminated else {
        return Err(TraceError::NoIntersection);
    };
    let edges = &reach.edges;
    let index_of = |e: &Edge| edges.binary_search(e).expect("intersection edge in matching");
    let owner: HashMap<Colour, usize> =
        edges.iter().enumerate().map(|(j, e)| (e.colour, j)).collect();
    let mut removed = vec![false; edges.len()];
    let mut leftover = [
        mask(&reach.a0, g_star.size_a()),
        mask(&reach.b0, g_star.size_b()),
    ];
    let mut new_colours: Vec<Colour> = Vec::new();
    let mut added: Vec<Edge> = Vec::new();

    // An edge at `v` on side `at` into the leftover pool of the other side,
    // coloured from the pool with stamp below `bound`.
    let choose = |at: Side,
                      v: usize,
                      bound: u32,
                      step: usize,
                      leftover: &mut [Vec<bool>; 2],
                      new_colours: &mut Vec<Colour>|
     -> Result<Edge, TraceError> {
        let pool = &leftover[at.other() as usize];
        let pick = g_star
            .edges_at(at, v)
            .filter(|e| pool[e.endpoint(at.other())])
            .filter(|e| reach.stamp(e.colour).is_some_and(|s| s < bound))
            .filter(|e| !new_colours.contains(&e.colour))
            .min_by_key(|e| (reach.stamp(e.colour), e.colour, e.endpoint(at.other())))
            .copied();
        let e = pick.ok_or(TraceError::NoFreshEdge {
            step,
            side: at,
            vertex: v,
            stamp_bound: bound,
        })?;
        leftover[at.other() as usize][e.endpoint(at.other())] = false;
        new_colours.push(e.colour);
        Ok(e)
    };

    let j = index_of(&ab);
    removed[j] = true;
    let sa = reach.stamp_a[j].expect("intersection edge in R^A");
    let sb = reach.stamp_b[j].expect("intersection edge in R^B");
    added.push(choose(Side::B, ab.b(), sa, 0, &mut leftover, &mut new_colours)?);
    added.push(choose(Side::A, ab.a(), sb, 0, &mut leftover, &mut new_colours)?);

    let mut steps = 0;
    loop {
        let active = added
            .iter()
            .filter(|e| owner.get(&e.colour).is_some_and(|&o| !removed[o]))
            .min()
            .copied();
        let Some(x) = active else { break };
        steps += 1;
        let o = owner[&x.colour];
        removed[o] = true;
        let conflict = edges[o];
        let first = reach.stamp(conflict.colour).expect("matching colour joined the pool");
        // The end that qualified at the colour's first stamp gets the new edge.
        let e = if reach.stamp_a[o] == Some(first) {
            choose(Side::B, conflict.b(), first, steps, &mut leftover, &mut new_colours)?
        } else {
            choose(Side::A, conflict.a(), first, steps, &mut leftover, &mut new_colours)?
        };
        added.push(e);
    }

    let kept = edges
        .iter()
        .zip(&removed)
        .filter(|(_, &r)| !r)
        .map(|(e, _)| *e);
    let matching = RainbowMatching::new(kept.chain(added.iter().copied()).collect()).sorted();
    let defect: Option<MatchingDefect> = matching.verify(g_star).err();
    if let Some(d) = defect {
        return Err(TraceError::Invalid(d.to_string()));
    }
    if matching.len() != m2.len() + 1 {
        return Err(TraceError::Invalid(format!(
            "size {} after repairing a matching of size {}",
            matching.len(),
            m2.len()
        )));
    }
    Ok(TraceResult {
        matching,
        steps,
        removed: edges
            .iter()
            .zip(&removed)
            .filter(|(_, &r)| r)
            .map(|(e, _)| *e)
            .collect(),
        added,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AugmentConfig {
    pub threshold: usize,
    pub step_cap: usize,
}

/// One trace-back call seen during augmentation.
pub struct TraceEvent<'a> {
    pub graph: &'a ColouredBipartiteGraph,
    pub input: &'a RainbowMatching,
    pub reach: &'a ReachState,
    pub outcome: &'a Result<TraceResult, TraceError>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AugmentReport {
    #[serde(skip)]
    pub matching: RainbowMatching,
    pub greedy_size: usize,
    pub final_size: usize,
    pub augmentations: usize,
    pub trace_failures: usize,
    pub last_termination: Option<ReachTermination>,
    /// Largest step count of a reachability run that ended in an intersection.
    pub max_reach_steps: usize,
    /// Largest trace-back replacement count.
    pub max_trace_steps: usize,
    pub min_degree: usize,
    /// `δ - 2δ^{2/3}`.
    pub benchmark: f64,
}

impl AugmentReport {
    pub fn meets_benchmark(&self) -> bool {
        self.final_size as f64 >= self.benchmark
    }
}

/// Greedy start, then reachability and trace-back with the uncovered
/// vertices as leftovers until reachability stops without an intersection
/// or a repair fails.
pub fn augmenting_rainbow(
    graph: &ColouredBipartiteGraph,
    seed: u64,
    config: &AugmentConfig,
    observer: &mut dyn FnMut(&TraceEvent),
) -> AugmentReport {
    let mut m = greedy_rainbow(graph, seed);
    let greedy_size = m.len();
    let mut report = AugmentReport {
        matching: RainbowMatching::empty(),
        greedy_size,
        final_size: 0,
        augmentations: 0,
        trace_failures: 0,
        last_termination: None,
        max_reach_steps: 0,
        max_trace_steps: 0,
        min_degree: graph.min_degree(),
        benchmark: 0.0,
    };
    let delta = report.min_degree as f64;
    report.benchmark = delta - 2.0 * delta.powf(2.0 / 3.0);
    loop {
        let mut used_a = vec![false; graph.size_a()];
        let mut used_b = vec![false; graph.size_b()];
        for e in m.edges() {
            used_a[e.a()] = true;
            used_b[e.b()] = true;
        }
        let a0: Vec<usize> = graph.part_a().into_iter().filter(|&a| !used_a[a]).collect();
        let b0: Vec<usize> = graph.part_b().into_iter().filter(|&b| !used_b[b]).collect();
        if a0.is_empty() || b0.is_empty() {
            break;
        }
        let reach = build_reach(graph, &m, &a0, &b0, config.threshold, config.step_cap);
        report.last_termination = Some(reach.terminated);
        if !matches!(reach.terminated, ReachTermination::Intersection(_)) {
            break;
        }
        report.max_reach_steps = report.max_reach_steps.max(reach.step_count());
        let outcome = trace_back(graph, &m, &reach);
        observer(&TraceEvent {
            graph,
            input: &m,
            reach: &reach,
            outcome: &outcome,
        });
        match outcome {
            Ok(result) => {
                report.augmentations += 1;
                report.max_trace_steps = report.max_trace_steps.max(result.steps);
                m = result.matching;
            }
            Err(_) => {
                report.trace_failures += 1;
                break;
            }
        }
    }
    report.final_size = m.len();
    report.matching = m;
    report
}
