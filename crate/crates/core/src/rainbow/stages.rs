//! Completion stages after the augmentation: trimming the core, the greedy
//! matching of leftovers and the final Hall matching.

use std::fmt;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::engine::{hall_violator, max_matching};
use crate::graph::{mask, ColouredBipartiteGraph, Side, Subpair};
use crate::matching::RainbowMatching;
use crate::seed;

use super::params::PipelineParams;

/// A logged inequality. `slack` is positive when it holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub at_least: bool,
    pub holds: bool,
    /// A failing hard check stops the pipeline.
    pub hard: bool,
}

impl Check {
    pub fn at_least(name: &str, value: f64, bound: f64, hard: bool) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            at_least: true,
            holds: value >= bound,
            hard,
        }
    }

    pub fn at_most(name: &str, value: f64, bound: f64, hard: bool) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            at_least: false,
            holds: value <= bound,
            hard,
        }
    }

    pub fn slack(&self) -> f64 {
        if self.at_least {
            self.value - self.bound
        } else {
            self.bound - self.value
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = if self.at_least { ">=" } else { "<=" };
        let mark = if self.holds { "ok" } else if self.hard { "FAIL" } else { "warn" };
        write!(
            f,
            "{} {} {rel} {} [{mark} slack {}]",
            self.name,
            fmt_num(self.value),
            fmt_num(self.bound),
            fmt_num(self.slack())
        )
    }
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.3}")
    }
}

#[derive(Clone, Debug)]
pub struct TrimmedCore {
    pub pair: Subpair,
    /// `G₁'`: the core without trimmed vertices and matching-coloured edges.
    pub graph: ColouredBipartiteGraph,
    pub trimmed_a: Vec<usize>,
    pub trimmed_b: Vec<usize>,
    pub heavy_a: usize,
    pub heavy_b: usize,
    pub checks: Vec<Check>,
}

/// Deletes edges of `g1` coloured by `m2`, then the same number of vertices
/// from each side: vertices that lost more than the loss threshold first
/// (largest loss, then lowest index), padded with the lowest-index others.
/// `None` if the trim would empty the core.
pub fn trim_core(
    g1: &ColouredBipartiteGraph,
    m2: &RainbowMatching,
    d: f64,
    params: &PipelineParams,
) -> Option<TrimmedCore> {
    let a1 = g1.part_a().len();
    let mut used = vec![false; g1.colour_space()];
    for c in m2.colours() {
        used[c as usize] = true;
    }
    let kept = g1.filter_edges(|e| !used[e.colour as usize]);
    let loss_threshold = params.loss_threshold(d, a1);
    let target = params.trim_count(d, a1);
    let heavy = |side: Side| {
        let mut h: Vec<(usize, usize)> = g1
            .part(side)
            .into_iter()
            .map(|v| (g1.degree(side, v) - kept.degree(side, v), v))
            .filter(|&(loss, _)| loss as f64 > loss_threshold)
            .collect();
        h.sort_by_key(|&(loss, v)| (std::cmp::Reverse(loss), v));
        h.into_iter().map(|(_, v)| v).collect::<Vec<_>>()
    };
    let heavy_a = heavy(Side::A);
    let heavy_b = heavy(Side::B);
    let r = target.max(heavy_a.len()).max(heavy_b.len());
    if r >= a1 {
        return None;
    }
    let pad = |side: Side, mut chosen: Vec<usize>| {
        let taken = mask(&chosen, g1.side_size(side));
        chosen.extend(g1.part(side).into_iter().filter(|&v| !taken[v]).take(r - chosen.len()));
        chosen.sort_unstable();
        chosen
    };
    let (h_a, h_b) = (heavy_a.len(), heavy_b.len());
    let trimmed_a = pad(Side::A, heavy_a);
    let trimmed_b = pad(Side::B, heavy_b);
    let graph = kept.without_vertices(&trimmed_a, &trimmed_b);
    let coef = params.effective_min_deg_coef(d, a1);
    let trim = params.trim_coef;
    let heavy_bound = n_over(g1, d, a1) / trim;
    let checks = vec![
        Check::at_most("heavy-a", h_a as f64, heavy_bound, false),
        Check::at_most("heavy-b", h_b as f64, heavy_bound, false),
        Check::at_most("heavy-within-trim", h_a.max(h_b) as f64, target as f64, false),
        Check::at_least(
            "trimmed-min-degree",
            graph.min_degree() as f64,
            (coef - 2.0 * trim) * d * a1 as f64,
            false,
        ),
    ];
    Some(TrimmedCore {
        pair: graph.parts(),
        graph,
        trimmed_a,
        trimmed_b,
        heavy_a: h_a,
        heavy_b: h_b,
        checks,
    })
}

/// `n / (d|A₁|)` with `n` the larger side of the ambient graph.
fn n_over(g: &ColouredBipartiteGraph, d: f64, a1: usize) -> f64 {
    g.size_a().max(g.size_b()) as f64 / (d * a1.max(1) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HardLeftovers {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub checks: Vec<Check>,
}

/// Leftover vertices with at least half of their edges into the opposite
/// trimmed part coloured by `m2`.
pub fn classify_hard_leftovers(
    full: &ColouredBipartiteGraph,
    a0: &[usize],
    b0: &[usize],
    core: &Subpair,
    m2: &RainbowMatching,
    bound: f64,
) -> HardLeftovers {
    let mut used = vec![false; full.colour_space()];
    for c in m2.colours() {
        used[c as usize] = true;
    }
    let hard = |side: Side, leftovers: &[usize]| -> Vec<usize> {
        let target = core.part(side.other());
        let in_target = mask(target, full.side_size(side.other()));
        leftovers
            .iter()
            .copied()
            .filter(|&v| {
                let bad = full
                    .edges_at(side, v)
                    .filter(|e| in_target[e.endpoint(side.other())] && used[e.colour as usize])
                    .count();
                2 * bad >= target.len() && !target.is_empty()
            })
            .collect()
    };
    let a = hard(Side::A, a0);
    let b = hard(Side::B, b0);
    let checks = vec![
        Check::at_most("hard-leftovers-a", a.len() as f64, bound, false),
        Check::at_most("hard-leftovers-b", b.len() as f64, bound, false),
    ];
    HardLeftovers { a, b, checks }
}

/// Why a leftover vertex found no edge, over its edges into the target part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChoiceCensus {
    pub edges: usize,
    pub endpoint_used: usize,
    pub colour_used: usize,
    /// Phase 1 only: edges of an unreserved colour.
    pub unreserved: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("phase {phase}: {side:?} vertex {vertex} has no admissible edge ({census:?})")]
pub struct M0Failure {
    pub phase: u8,
    pub side: Side,
    pub vertex: usize,
    pub census: ChoiceCensus,
}

/// Matches every leftover into the opposite trimmed part: the hard leftovers
/// first with reserved colours, then the rest with any colour unused by `m2`
/// and earlier choices. Each vertex takes the first admissible endpoint in a
/// seeded order of the target part.
#[allow(clippy::too_many_arguments)]
pub fn greedy_m0(
    full: &ColouredBipartiteGraph,
    reserved: &[bool],
    a0: &[usize],
    b0: &[usize],
    hard: &HardLeftovers,
    core: &Subpair,
    m2: &RainbowMatching,
    seed: u64,
) -> Result<RainbowMatching, M0Failure> {
    let mut rng = seed::rng(seed);
    let mut rank = [vec![usize::MAX; full.size_a()], vec![usize::MAX; full.size_b()]];
    for side in [Side::A, Side::B] {
        let mut order = core.part(side).to_vec();
        order.shuffle(&mut rng);
        for (i, v) in order.into_iter().enumerate() {
            rank[side as usize][v] = i;
        }
    }
    let mut colour_used = vec![false; full.colour_space()];
    for c in m2.colours() {
        colour_used[c as usize] = true;
    }
    let mut endpoint_used = [vec![false; full.size_a()], vec![false; full.size_b()]];
    let mut m0 = RainbowMatching::empty();
    let hard_mask = [mask(&hard.a, full.size_a()), mask(&hard.b, full.size_b())];
    let phases: [(u8, Side, Vec<usize>); 4] = [
        (1, Side::A, hard.a.clone()),
        (1, Side::B, hard.b.clone()),
        (2, Side::A, a0.iter().copied().filter(|&v| !hard_mask[0][v]).collect()),
        (2, Side::B, b0.iter().copied().filter(|&v| !hard_mask[1][v]).collect()),
    ];
    for (phase, side, vertices) in phases {
        let other = side.other();
        for v in vertices {
            let mut census = ChoiceCensus {
                edges: 0,
                endpoint_used: 0,
                colour_used: 0,
                unreserved: 0,
            };
            let mut best = None;
            for e in full.edges_at(side, v) {
                let u = e.endpoint(other);
                if rank[other as usize][u] == usize::MAX {
                    continue;
                }
                census.edges += 1;
                if endpoint_used[other as usize][u] {
                    census.endpoint_used += 1;
                } else if colour_used[e.colour as usize] {
                    census.colour_used += 1;
                } else if phase == 1 && !reserved[e.colour as usize] {
                    census.unreserved += 1;
                } else if best.is_none_or(|(r, _)| rank[other as usize][u] < r) {
                    best = Some((rank[other as usize][u], *e));
                }
            }
            let Some((_, e)) = best else {
                return Err(M0Failure {
                    phase,
                    side,
                    vertex: v,
                    census,
                });
            };
            endpoint_used[other as usize][e.endpoint(other)] = true;
            colour_used[e.colour as usize] = true;
            m0.push(e);
        }
    }
    Ok(m0.sorted())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalCore {
    pub pair: Subpair,
    pub min_degree: usize,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize, thiserror::Error)]
#[error("final core has no perfect matching: {side:?} set of size {} sees {neighbours} vertices", violator.len())]
pub struct M3Failure {
    pub side: Side,
    pub violator: Vec<usize>,
    pub neighbours: usize,
    pub matched: usize,
    pub pair: Subpair,
}

/// `G₃`: the trimmed core without vertices covered by `m0` and without
/// edges sharing a colour with `m0`.
pub fn final_core(core: &TrimmedCore, m0: &RainbowMatching) -> ColouredBipartiteGraph {
    let mut used = vec![false; core.graph.colour_space()];
    for c in m0.colours() {
        used[c as usize] = true;
    }
    let covered_a: Vec<usize> = m0.edges().iter().map(|e| e.a()).collect();
    let covered_b: Vec<usize> = m0.edges().iter().map(|e| e.b()).collect();
    core.graph
        .filter_edges(|e| !used[e.colour as usize])
        .without_vertices(&covered_a, &covered_b)
}

/// Perfect matching of `G₃` by Hopcroft–Karp, or a Hall violator.
pub fn finish_m3(
    core: &TrimmedCore,
    m0: &RainbowMatching,
    leftovers: usize,
    min_degree_bound: f64,
) -> (FinalCore, Result<RainbowMatching, M3Failure>) {
    let g3 = final_core(core, m0);
    let pair = g3.parts();
    let expected = core.pair.len_a() as f64 - leftovers as f64;
    let min_degree = g3.min_degree();
    let checks = vec![
        Check::at_least("final-core-a", pair.len_a() as f64, expected, true),
        Check::at_most("final-core-a", pair.len_a() as f64, expected, true),
        Check::at_least("final-core-b", pair.len_b() as f64, expected, true),
        Check::at_most("final-core-b", pair.len_b() as f64, expected, true),
        Check::at_least("final-min-degree", min_degree as f64, min_degree_bound, false),
    ];
    let info = FinalCore {
        pair: pair.clone(),
        min_degree,
        checks,
    };
    let m = max_matching(&g3);
    if m.len() == pair.len_a() && m.len() == pair.len_b() {
        return (info, Ok(RainbowMatching::new(m).sorted()));
    }
    let side = if m.len() < pair.len_a() { Side::A } else { Side::B };
    let violator = hall_violator(&g3, side).unwrap_or_default();
    let neighbours = crate::engine::neighbourhood_size(&g3, side, &violator);
    let failure = M3Failure {
        side,
        violator,
        neighbours,
        matched: m.len(),
        pair,
    };
    (info, Err(failure))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::cyclic_latin;
    use crate::graph::Edge;

    #[test]
    fn trim_without_shared_colours_only_resizes() {
        let g1 = ColouredBipartiteGraph::from_latin(&cyclic_latin(8));
        let m2 = RainbowMatching::new(vec![Edge::new(0, 0, 100)]);
        let g1 = ColouredBipartiteGraph::new(8, 8, 200, g1.edges().to_vec()).unwrap();
        let params = PipelineParams::default();
        let t = trim_core(&g1, &m2, 1.0, &params).unwrap();
        assert_eq!(t.trimmed_a, vec![0]);
        assert_eq!(t.trimmed_b, vec![0]);
        assert_eq!(t.graph.edge_count(), 49);
        assert_eq!((t.heavy_a, t.heavy_b), (0, 0));
    }

    #[test]
    fn heavy_losers_go_first() {
        let g1 = ColouredBipartiteGraph::from_latin(&cyclic_latin(6));
        // Colours 0 and 1 cover two edges at every vertex.
        let m2 = RainbowMatching::new(vec![Edge::new(0, 0, 0), Edge::new(0, 1, 1)]);
        let t = trim_core(&g1, &m2, 1.0, &PipelineParams::default());
        assert!(t.is_none());
        let m2 = RainbowMatching::new(vec![Edge::new(0, 0, 0)]);
        let t = trim_core(&g1, &m2, 1.0, &PipelineParams::default()).unwrap();
        assert_eq!(t.trimmed_a, vec![0]);
        assert_eq!(t.graph.min_degree(), 4);
    }

    #[test]
    fn hard_leftover_definition() {
        let k = ColouredBipartiteGraph::from_latin(&cyclic_latin(4));
        let core = Subpair::new(vec![2, 3], vec![2, 3]);
        let none = classify_hard_leftovers(&k, &[0, 1], &[0, 1], &core, &RainbowMatching::empty(), 1.0);
        assert!(none.a.is_empty() && none.b.is_empty());
        // Row 0 sees columns 2 and 3 in colours 2 and 3.
        let m2 = RainbowMatching::new(vec![Edge::new(1, 1, 2)]);
        let h = classify_hard_leftovers(&k, &[0], &[], &core, &m2, 1.0);
        assert_eq!(h.a, vec![0]);
    }

    #[test]
    fn greedy_m0_and_m3_complete_a_square() {
        let k = ColouredBipartiteGraph::from_latin(&crate::generators::random_latin(7, 3, 300));
        let n = 7;
        let distinct: Vec<Edge> = k
            .edges()
            .iter()
            .map(|e| Edge::new(e.a(), e.b(), (e.a() * n + e.b()) as u32))
            .collect();
        let k = ColouredBipartiteGraph::new(n, n, n * n, distinct).unwrap();
        let core = k.induced(&Subpair::new((1..7).collect(), (1..7).collect()));
        let trimmed = TrimmedCore {
            pair: core.parts(),
            graph: core.clone(),
            trimmed_a: vec![],
            trimmed_b: vec![],
            heavy_a: 0,
            heavy_b: 0,
            checks: vec![],
        };
        let hard = HardLeftovers {
            a: vec![],
            b: vec![],
            checks: vec![],
        };
        let reserved = vec![false; n * n];
        assert!(greedy_m0(&k, &reserved, &[], &[], &hard, &core.parts(), &RainbowMatching::empty(), 0)
            .unwrap()
            .is_empty());
        let m0 = greedy_m0(&k, &reserved, &[0], &[0], &hard, &core.parts(), &RainbowMatching::empty(), 5)
            .unwrap();
        assert_eq!(m0.len(), 2);
        let (info, m3) = finish_m3(&trimmed, &m0, 1, 0.0);
        assert!(info.checks.iter().all(|c| c.holds));
        let m3 = m3.unwrap();
        let all = RainbowMatching::union([&m0, &m3]);
        assert_eq!(all.len(), 7);
        assert!(all.verify(&k).is_ok());
    }

    #[test]
    fn phase_one_needs_reserved_colours() {
        let k = ColouredBipartiteGraph::from_latin(&cyclic_latin(4));
        let core = Subpair::new(vec![1, 2, 3], vec![1, 2, 3]);
        let hard = HardLeftovers {
            a: vec![0],
            b: vec![],
            checks: vec![],
        };
        let err = greedy_m0(&k, &[false; 4], &[0], &[], &hard, &core, &RainbowMatching::empty(), 0)
            .unwrap_err();
        assert_eq!(err.phase, 1);
        assert_eq!(err.census.unreserved, 3);
    }
}
