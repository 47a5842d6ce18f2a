use num_rational::Ratio;
use proptest::prelude::*;
use transversal::engine::{ExpansionOptions, ExpansionSpec};
use transversal::generators::{random_latin, split_colours};
use transversal::robust::{
    certify_robust_pair, dense_subpair, density, is_dense, prune_to_robust, DenseOptions,
    DensityParams, DensityVerdict, PruneOptions,
};
use transversal::{one_edge_per_colour, ColouredBipartiteGraph, Edge, Subpair};

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
    (1..=max_side, 1..=max_side, 0.05f64..0.95).prop_flat_map(|(na, nb, p)| {
        proptest::collection::vec(proptest::bool::weighted(p), na * nb)
            .prop_map(move |mask| graph_from_mask(na, nb, &mask))
    })
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..1 << n).map(move |bits| (0..n).filter(|i| bits >> i & 1 == 1).collect())
}

/// Minimum density over all pairs at or above the thresholds.
fn brute_min_density(g: &ColouredBipartiteGraph, eps: f64) -> Ratio<u64> {
    let ta = (eps * g.size_a() as f64).ceil() as usize;
    let tb = (eps * g.size_b() as f64).ceil() as usize;
    let mut best = Ratio::new(1, 1);
    for a in subsets(g.size_a()).filter(|s| s.len() >= ta) {
        for b in subsets(g.size_b()).filter(|s| s.len() >= tb) {
            best = best.min(density(g, &Subpair::new(a.clone(), b)).unwrap());
        }
    }
    best
}

/// Random Latin instance reduced to one edge per colour.
fn instance(n: usize, k: usize, seed: u64) -> (ColouredBipartiteGraph, f64) {
    let array = split_colours(&random_latin(n, seed, (n * n * n) as u64), k, seed).unwrap();
    let full = ColouredBipartiteGraph::from_latin(&array);
    (one_edge_per_colour(&full, seed), k as f64 / (n * n) as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_density_check_matches_enumeration(
        g in arb_graph(6),
        eps in prop::sample::select(vec![0.1f64, 0.3, 0.5, 0.8]),
        delta in 0.0f64..1.0,
    ) {
        let truth = brute_min_density(&g, eps);
        let truth_f = *truth.numer() as f64 / *truth.denom() as f64;
        match is_dense(&g, eps, delta, &DenseOptions::default()) {
            DensityVerdict::Dense { exact } => {
                prop_assert!(exact);
                prop_assert!(truth_f >= delta);
            }
            DensityVerdict::Sparse { witness, density: dens } => {
                prop_assert_eq!(dens, truth);
                prop_assert_eq!(density(&g, &witness).unwrap(), dens);
                prop_assert!(truth_f < delta);
            }
        }
    }

    #[test]
    fn density_ignores_relabelling(g in arb_graph(7), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut rng = transversal::seed::rng(seed);
        let mut pa: Vec<usize> = (0..g.size_a()).collect();
        let mut pb: Vec<usize> = (0..g.size_b()).collect();
        let mut pc: Vec<u32> = (0..g.colour_space() as u32).collect();
        pa.shuffle(&mut rng);
        pb.shuffle(&mut rng);
        pc.shuffle(&mut rng);
        let edges = g
            .edges()
            .iter()
            .map(|e| Edge::new(pa[e.a()], pb[e.b()], pc[e.colour as usize]))
            .collect();
        let h = ColouredBipartiteGraph::new(g.size_a(), g.size_b(), g.colour_space(), edges).unwrap();
        prop_assert_eq!(density(&g, &g.parts()).unwrap(), density(&h, &h.parts()).unwrap());
    }
}

#[test]
fn dense_subpair_outputs_are_dense_and_balanced() {
    let params = DensityParams::default();
    for seed in 0..30 {
        for (n, k) in [(8, 20), (10, 40), (12, 72), (16, 200)] {
            let (g, d) = instance(n, k, seed);
            let out = dense_subpair(&g, &params, d, &DenseOptions::default()).unwrap();
            assert!(out.pair.is_balanced());
            assert!(out.iterations <= params.max_increments(d));
            let view = g.induced(&out.pair);
            let check = is_dense(&view, params.epsilon, params.c_prime * out.density, &DenseOptions::default());
            assert_eq!(check, DensityVerdict::Dense { exact: true }, "seed {seed} n {n}");
        }
    }
}

#[test]
fn sparse_start_triggers_increments() {
    // A dense 6x6 block inside an otherwise empty 20x20 graph.
    let mask: Vec<bool> = (0..400).map(|i| i / 20 < 6 && i % 20 < 6).collect();
    let g = graph_from_mask(20, 20, &mask);
    let params = DensityParams::default();
    let d = 36.0 / 400.0;
    let out = dense_subpair(&g, &params, d, &DenseOptions::default()).unwrap();
    assert!(out.iterations >= 1);
    assert!(out.density > params.increment() * d);
    assert!(out.pair.is_balanced());
}

#[test]
fn pruned_pairs_certify_exactly() {
    let params = DensityParams::default();
    let options = ExpansionOptions::default();
    let mut certified = 0;
    for seed in 0..40 {
        let (g, d) = instance(14, 98, seed);
        let dense = dense_subpair(&g, &params, d, &DenseOptions::default()).unwrap();
        let coef = 1.0 / (d * dense.pair.len_a() as f64);
        let Ok(robust) = prune_to_robust(&g, &dense.pair, d, coef, &params, &PruneOptions::default())
        else {
            continue;
        };
        assert!(robust.pair.is_balanced());
        assert!(robust.pair.len_a() <= 20);
        assert_eq!(robust.expansion, ExpansionSpec::for_part(robust.pair.len_a()));
        let cert = certify_robust_pair(&g, &robust, &options);
        assert!(cert.exact());
        assert!(cert.degree_ok, "seed {seed}: {cert:?}");
        assert!(cert.holds(), "seed {seed}: {cert:?}");
        certified += 1;
    }
    assert!(certified >= 30, "only {certified} successful prunes");
}
