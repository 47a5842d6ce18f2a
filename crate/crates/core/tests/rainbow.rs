use proptest::prelude::*;
use rand::seq::SliceRandom;
use transversal::generators::{random_latin, split_colours, z2k_table};
use transversal::oracle::{count_transversals, max_rainbow_matching_exact};
use transversal::rainbow::{
    augment_restarts, augmenting_rainbow, build_reach, greedy_rainbow, solve_auto, solve_pipeline,
    solve_pipeline_observed, trace_back, AugmentConfig, PipelineObserver, PipelineParams,
    ReachState, ReachTermination, Stage, TraceError, TraceEvent,
};
use transversal::{one_edge_per_colour, verify_rainbow_perfect, ColouredBipartiteGraph, LatinArray};

fn instance(n: usize, k: usize, seed: u64) -> LatinArray {
    split_colours(&random_latin(n, seed, (4 * n * n) as u64), k, seed).unwrap()
}

fn check_reach(r: &ReachState) -> Result<(), TestCaseError> {
    let last = r.steps.len() as u32 * 2;
    for (j, e) in r.edges.iter().enumerate() {
        if let (Some(sa), Some(sb)) = (r.stamp_a[j], r.stamp_b[j]) {
            // Both sets only meet in the final phase.
            prop_assert!(matches!(r.terminated, ReachTermination::Intersection(_)));
            prop_assert!(sa.max(sb) + 1 >= last, "{:?}", e);
        }
    }
    let stamps: Vec<u32> = r.added.iter().map(|&c| r.stamp(c).unwrap()).collect();
    prop_assert!(stamps.windows(2).all(|w| w[0] <= w[1]));
    for e in &r.edges {
        let in_pool = r.stamp(e.colour);
        prop_assert!(in_pool.is_none() || r.added.contains(&e.colour));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn augmentation_invariants(n in 6usize..24, extra in 0usize..200, seed in any::<u64>()) {
        let k = (n + extra).min(n * n);
        let full = ColouredBipartiteGraph::from_latin(&instance(n, k, seed));
        let g = one_edge_per_colour(&full, seed);
        for threshold in [1, 2] {
            let config = AugmentConfig { threshold, step_cap: 12 };
            let mut trace_calls = 0;
            let report = augmenting_rainbow(&g, seed, &config, &mut |ev| {
                trace_calls += 1;
                match ev.outcome {
                    Ok(t) => {
                        assert_eq!(t.matching.len(), ev.input.len() + 1);
                        assert!(t.matching.verify(ev.graph).is_ok());
                    }
                    Err(e) => assert!(!matches!(e, TraceError::Invalid(_)), "{e}"),
                }
            });
            prop_assert!(report.final_size >= report.greedy_size);
            prop_assert_eq!(report.final_size, report.greedy_size + report.augmentations);
            prop_assert_eq!(trace_calls, report.augmentations + report.trace_failures);
            prop_assert!(report.matching.verify(&g).is_ok());

            let m = greedy_rainbow(&g, seed ^ 1);
            let cover_a: Vec<bool> = (0..n).map(|a| m.edges().iter().any(|e| e.a() == a)).collect();
            let cover_b: Vec<bool> = (0..n).map(|b| m.edges().iter().any(|e| e.b() == b)).collect();
            let a0: Vec<usize> = g.part_a().into_iter().filter(|&a| !cover_a[a]).collect();
            let b0: Vec<usize> = g.part_b().into_iter().filter(|&b| !cover_b[b]).collect();
            let reach = build_reach(&g, &m, &a0, &b0, threshold, 12);
            check_reach(&reach)?;
            match trace_back(&g, &m, &reach) {
                Ok(t) => {
                    prop_assert_eq!(t.matching.len(), m.len() + 1);
                    prop_assert!(t.matching.verify(&g).is_ok());
                }
                Err(TraceError::Invalid(d)) => prop_assert!(false, "{}", d),
                Err(TraceError::NoIntersection) => {
                    prop_assert!(!matches!(reach.terminated, ReachTermination::Intersection(_)))
                }
                Err(TraceError::NoFreshEdge { .. }) => {}
            }
        }
    }

    #[test]
    fn auto_agrees_with_oracle(n in 1usize..=8, extra in 0usize..40, seed in any::<u64>()) {
        let a = instance(n, (n + extra).min(n * n), seed);
        let out = solve_auto(&a, seed);
        prop_assert!(out.authoritative);
        prop_assert_eq!(out.matching.is_some(), count_transversals(&a) > 0);
        if let Some(m) = out.matching {
            prop_assert!(verify_rainbow_perfect(&ColouredBipartiteGraph::from_latin(&a), &m));
        }
    }
}

#[test]
fn stalled_augmentation_against_the_oracle() {
    // When the maximum rainbow matching is already reached, an
    // intersection can only end in a failed repair.
    let mut checked = 0;
    for seed in 0..200 {
        let n = 7;
        let full = ColouredBipartiteGraph::from_latin(&instance(n, 10 + (seed as usize % 30), seed));
        let g = one_edge_per_colour(&full, seed);
        let config = AugmentConfig { threshold: 1, step_cap: 8 };
        let report = augmenting_rainbow(&g, seed, &config, &mut |_| {});
        let best = max_rainbow_matching_exact(&g).unwrap();
        assert!(best.len() >= report.final_size);
        let saturating = report.final_size == g.part_a().len().min(g.part_b().len());
        if best.len() == report.final_size && !saturating {
            checked += 1;
            assert!(report.trace_failures > 0
                || !matches!(report.last_termination, Some(ReachTermination::Intersection(_))));
        }
    }
    assert!(checked > 50);
}

#[test]
fn even_tables_are_never_claimed() {
    for k_half in 1..=4 {
        let a = z2k_table(k_half);
        for seed in 0..5 {
            assert!(solve_auto(&a, seed).matching.is_none());
            assert!(solve_pipeline(&a, &PipelineParams::default(), seed).result.is_err());
            assert!(augment_restarts(&a, seed, 4).is_none());
        }
    }
}

#[test]
fn pipeline_is_deterministic_and_colour_blind() {
    let n = 40;
    let a = instance(n, n * n * 3 / 4, 9);
    let params = PipelineParams::default();
    let first = solve_pipeline(&a, &params, 3);
    let second = solve_pipeline(&a, &params, 3);
    assert_eq!(first.result, second.result);
    assert_eq!(first.log, second.log);
    let m = first.result.clone().expect("dense instance succeeds");

    let mut perm: Vec<u32> = (0..a.colour_count() as u32).collect();
    perm.shuffle(&mut transversal::seed::rng(77));
    let relabelled = a.relabel_colours(&perm).unwrap();
    let other = solve_pipeline(&relabelled, &params, 3).result.unwrap();
    let cells = |m: &transversal::RainbowMatching| m.edges().iter().map(|e| (e.a(), e.b())).collect::<Vec<_>>();
    assert_eq!(cells(&m), cells(&other));
    assert!(verify_rainbow_perfect(&ColouredBipartiteGraph::from_latin(&relabelled), &other));
}

#[test]
fn failures_name_a_stage() {
    struct Stages(Vec<Stage>, usize);
    impl PipelineObserver for Stages {
        fn on_stage(&mut self, r: &transversal::rainbow::StageRecord) {
            self.0.push(r.stage);
        }
        fn on_trace_back(&mut self, _: &TraceEvent) {
            self.1 += 1;
        }
    }
    for seed in 0..20 {
        let a = instance(30, 30 + 40 * seed as usize, seed);
        let mut obs = Stages(Vec::new(), 0);
        let out = solve_pipeline_observed(&a, &PipelineParams::default(), seed, &mut obs);
        assert_eq!(obs.0, out.log.iter().map(|r| r.stage).collect::<Vec<_>>());
        match out.result {
            Ok(m) => {
                assert!(verify_rainbow_perfect(&ColouredBipartiteGraph::from_latin(&a), &m));
                assert_eq!(obs.0.last(), Some(&Stage::Assemble));
            }
            // A stage either logs and then fails, or fails before logging.
            Err(f) => assert!(obs.0.last() == Some(&f.stage) || !obs.0.contains(&f.stage)),
        }
    }
}

#[test]
fn benchmark_on_distinct_colours() {
    let n = 30;
    let full = ColouredBipartiteGraph::from_latin(&instance(n, n * n, 4));
    let config = AugmentConfig { threshold: 1, step_cap: 10 };
    let report = augmenting_rainbow(&full, 2, &config, &mut |_| {});
    assert_eq!(report.final_size, n);
    assert!(report.meets_benchmark());
}
