use proptest::prelude::*;
use transversal::engine::{
    expansion_check_with, hall_violator, max_matching, neighbourhood_size, ExpansionOptions,
    ExpansionSpec, ExpansionVerdict,
};
use transversal::{ColouredBipartiteGraph, Edge, Side};

fn graph_from_mask(na: usize, nb: usize, mask: &[bool]) -> ColouredBipartiteGraph {
    let edges = (0..na)
        .flat_map(|a| (0..nb).map(move |b| (a, b)))
        .filter(|&(a, b)| mask[a * nb + b])
        .enumerate()
        .map(|(i, (a, b))| Edge::new(a, b, i as u32))
        .collect();
    ColouredBipartiteGraph::new(na, nb, na * nb, edges).unwrap()
}

fn arb_graph(max_side: usize) -> impl Strategy<Value = ColouredBipartiteGraph> {
    (1..=max_side, 1..=max_side, 0.05f64..0.9).prop_flat_map(|(na, nb, p)| {
        proptest::collection::vec(proptest::bool::weighted(p), na * nb)
            .prop_map(move |mask| graph_from_mask(na, nb, &mask))
    })
}

/// Maximum matching size by trying every subset of A-vertices' choices.
fn brute_matching(g: &ColouredBipartiteGraph) -> usize {
    fn go(g: &ColouredBipartiteGraph, a: usize, used: &mut Vec<bool>) -> usize {
        if a == g.size_a() {
            return 0;
        }
        let mut best = go(g, a + 1, used);
        for e in g.edges_at_a(a) {
            if !used[e.b()] {
                used[e.b()] = true;
                best = best.max(1 + go(g, a + 1, used));
                used[e.b()] = false;
            }
        }
        best
    }
    go(g, 0, &mut vec![false; g.size_b()])
}

fn brute_expansion_holds(g: &ColouredBipartiteGraph, side: Side, spec: ExpansionSpec) -> bool {
    let part = g.part(side);
    (1u32..1 << part.len()).all(|bits| {
        let set: Vec<usize> = (0..part.len())
            .filter(|i| bits >> i & 1 == 1)
            .map(|i| part[i])
            .collect();
        neighbourhood_size(g, side, &set) >= spec.requirement(set.len())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn hopcroft_karp_is_maximum(g in arb_graph(7)) {
        let m = max_matching(&g);
        prop_assert_eq!(m.len(), brute_matching(&g));
        let mut rows: Vec<_> = m.iter().map(|e| e.a()).collect();
        let mut cols: Vec<_> = m.iter().map(|e| e.b()).collect();
        rows.sort();
        rows.dedup();
        cols.sort();
        cols.dedup();
        prop_assert_eq!(rows.len(), m.len());
        prop_assert_eq!(cols.len(), m.len());
        prop_assert!(m.iter().all(|e| g.has_edge(e)));
    }

    #[test]
    fn hall_violator_matches_saturation(g in arb_graph(8)) {
        for side in [Side::A, Side::B] {
            let saturating = max_matching(&g).len() == g.side_size(side);
            match hall_violator(&g, side) {
                None => prop_assert!(saturating),
                Some(s) => {
                    prop_assert!(!saturating);
                    prop_assert!(neighbourhood_size(&g, side, &s) < s.len());
                }
            }
        }
    }

    #[test]
    fn exact_expansion_agrees_with_enumeration(
        g in arb_graph(10),
        factor in prop::sample::select(vec![1.5f64, 2.0, 3.0]),
        cap_frac in 0.2f64..1.0,
    ) {
        let cap = ((g.size_b() as f64 * cap_frac) as usize).max(1);
        let spec = ExpansionSpec::new(factor, cap).unwrap();
        for side in [Side::A, Side::B] {
            let verdict = expansion_check_with(&g, side, spec, &ExpansionOptions::default());
            let truth = brute_expansion_holds(&g, side, spec);
            match verdict {
                ExpansionVerdict::Holds { exact } => {
                    prop_assert!(exact);
                    prop_assert!(truth);
                }
                ExpansionVerdict::Violator { set, neighbours, required } => {
                    prop_assert!(!truth);
                    prop_assert_eq!(neighbours, neighbourhood_size(&g, side, &set));
                    prop_assert!(neighbours < required);
                }
            }
        }
    }

    #[test]
    fn matching_size_survives_relabelling(g in arb_graph(9), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut rng = transversal::seed::rng(seed);
        let mut pa: Vec<usize> = (0..g.size_a()).collect();
        let mut pb: Vec<usize> = (0..g.size_b()).collect();
        pa.shuffle(&mut rng);
        pb.shuffle(&mut rng);
        let edges = g.edges().iter().map(|e| Edge::new(pa[e.a()], pb[e.b()], e.colour)).collect();
        let h = ColouredBipartiteGraph::new(g.size_a(), g.size_b(), g.colour_space(), edges).unwrap();
        prop_assert_eq!(max_matching(&g).len(), max_matching(&h).len());
    }
}

#[test]
fn heuristic_verdict_is_flagged() {
    let n = 30;
    let mask = vec![true; n * n];
    let g = graph_from_mask(n, n, &mask);
    let options = ExpansionOptions {
        exact_limit: 10,
        ..ExpansionOptions::default()
    };
    // Min degree 30 meets every requirement, so the certificate is exact.
    let spec = ExpansionSpec::new(2.0, 20).unwrap();
    assert_eq!(
        expansion_check_with(&g, Side::A, spec, &options),
        ExpansionVerdict::Holds { exact: true }
    );
    // A sparse banded graph needs the local search.
    let mask: Vec<bool> = (0..n * n).map(|i| (i % n + n - i / n) % n < 4).collect();
    let g = graph_from_mask(n, n, &mask);
    let spec = ExpansionSpec::new(1.5, 6).unwrap();
    assert_eq!(
        expansion_check_with(&g, Side::A, spec, &options),
        ExpansionVerdict::Holds { exact: false }
    );
}
