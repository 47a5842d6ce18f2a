use rand::Rng;
use serde::Serialize;

use crate::graph::{ColouredBipartiteGraph, Side, Subpair};
use crate::latin::Colour;
use crate::seed;

/// Per-vertex reserved degree into the opposite core part, against the band
/// `p|A₁| ± (p|A₁|)^{2/3}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReservationStats {
    pub expected: f64,
    pub half_width: f64,
    /// Vertices of B (all of B, not just B₁) whose reserved degree into A₁
    /// leaves the band.
    pub outside_b: usize,
    pub outside_a: usize,
    pub total_b: usize,
    pub total_a: usize,
    pub min_degree_b: usize,
    pub min_degree_a: usize,
    pub reserved_colours: usize,
}

impl ReservationStats {
    pub fn fraction_outside_b(&self) -> f64 {
        self.outside_b as f64 / self.total_b.max(1) as f64
    }
}

pub struct ReservationSplit {
    pub reserved: Vec<bool>,
    /// Edges of reserved colours.
    pub gr: ColouredBipartiteGraph,
    /// Unreserved edges with the core removed.
    pub g_star: ColouredBipartiteGraph,
    pub stats: ReservationStats,
}

impl ReservationSplit {
    pub fn is_reserved(&self, c: Colour) -> bool {
        self.reserved[c as usize]
    }
}

/// Each colour of `full` independently with probability `p`, in colour order.
pub fn sample_reserved(colour_space: usize, p: f64, seed: u64) -> Vec<bool> {
    let mut rng = seed::rng(seed);
    (0..colour_space).map(|_| rng.gen::<f64>() < p).collect()
}

/// Band statistics for a reserved colour set without building subgraphs.
pub fn reservation_stats(
    full: &ColouredBipartiteGraph,
    core: &Subpair,
    p: f64,
    reserved: &[bool],
) -> ReservationStats {
    let side_stats = |side: Side, target: &[usize]| {
        let mask = crate::graph::mask(target, full.side_size(side.other()));
        let expected = p * target.len() as f64;
        let half_width = expected.powf(2.0 / 3.0);
        let mut outside = 0;
        let mut min_degree = usize::MAX;
        let part = full.part(side);
        for &v in &part {
            let deg = full
                .edges_at(side, v)
                .filter(|e| mask[e.endpoint(side.other())] && reserved[e.colour as usize])
                .count();
            min_degree = min_degree.min(deg);
            if (deg as f64 - expected).abs() > half_width {
                outside += 1;
            }
        }
        (expected, half_width, outside, part.len(), min_degree)
    };
    let (expected, half_width, outside_b, total_b, min_b) = side_stats(Side::B, &core.part_a);
    let (_, _, outside_a, total_a, min_a) = side_stats(Side::A, &core.part_b);
    ReservationStats {
        expected,
        half_width,
        outside_b,
        outside_a,
        total_b,
        total_a,
        min_degree_b: min_b,
        min_degree_a: min_a,
        reserved_colours: reserved.iter().filter(|&&r| r).count(),
    }
}

/// Splits `full` by an independent `p`-sample of its colours.
pub fn reserve_colours(
    full: &ColouredBipartiteGraph,
    core: &Subpair,
    p: f64,
    seed: u64,
) -> ReservationSplit {
    let reserved = sample_reserved(full.colour_space(), p, seed);
    let stats = reservation_stats(full, core, p, &reserved);
    let gr = full.filter_edges(|e| reserved[e.colour as usize]);
    let g_star = full
        .filter_edges(|e| !reserved[e.colour as usize])
        .without_vertices(&core.part_a, &core.part_b);
    ReservationSplit {
        reserved,
        gr,
        g_star,
        stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::cyclic_latin;

    #[test]
    fn zero_probability_reserves_nothing() {
        let k = ColouredBipartiteGraph::from_latin(&cyclic_latin(6));
        let core = Subpair::new(vec![0, 1], vec![2, 3]);
        let split = reserve_colours(&k, &core, 0.0, 3);
        assert_eq!(split.gr.edge_count(), 0);
        assert_eq!(split.g_star.edge_count(), 16);
        assert!(!split.g_star.contains_a(0) && !split.g_star.contains_b(3));
        assert_eq!(split.stats.reserved_colours, 0);
    }

    #[test]
    fn partition_by_colour() {
        let k = ColouredBipartiteGraph::from_latin(&cyclic_latin(9));
        let core = Subpair::new(vec![0, 1, 2], vec![0, 1, 2]);
        let split = reserve_colours(&k, &core, 0.4, 11);
        for e in split.gr.edges() {
            assert!(split.is_reserved(e.colour));
        }
        for e in split.g_star.edges() {
            assert!(!split.is_reserved(e.colour));
            assert!(e.a() > 2 && e.b() > 2);
        }
        let unreserved = k.edges().iter().filter(|e| !split.is_reserved(e.colour)).count();
        assert_eq!(split.gr.edge_count() + unreserved, 81);
    }
}
