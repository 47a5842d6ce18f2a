//! The staged construction end to end, with a per-stage log.

use std::fmt;

use serde::Serialize;

use crate::graph::{mask, one_edge_per_colour, to_graph, ColouredBipartiteGraph, Edge, Side, Subpair};
use crate::latin::{Colour, LatinArray};
use crate::matching::RainbowMatching;
use crate::oracle::find_transversal_exact;
use crate::robust::{
    dense_subpair_from, prune_to_robust, DenseOptions, DenseSubpair, DensityParams, PruneOptions,
    RobustPair,
};
use crate::seed;

use super::augment::{augmenting_rainbow, AugmentConfig, AugmentReport, TraceEvent};
use super::params::{log2_ceil, PipelineParams};
use super::reserve::{reserve_colours, ReservationStats};
use super::stages::{classify_hard_leftovers, finish_m3, greedy_m0, trim_core, Check};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Input,
    OneEdgePerColour,
    DenseSubpair,
    PruneToRobust,
    ReserveColours,
    AugmentingRainbow,
    TrimCore,
    ClassifyLeftovers,
    GreedyM0,
    FinishM3,
    Assemble,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Input => "input",
            Stage::OneEdgePerColour => "one-edge-per-colour",
            Stage::DenseSubpair => "dense-subpair",
            Stage::PruneToRobust => "prune-to-robust",
            Stage::ReserveColours => "reserve-colours",
            Stage::AugmentingRainbow => "augmenting-rainbow",
            Stage::TrimCore => "trim-core",
            Stage::ClassifyLeftovers => "classify-leftovers",
            Stage::GreedyM0 => "greedy-m0",
            Stage::FinishM3 => "finish-m3",
            Stage::Assemble => "assemble",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub sizes: Vec<(String, usize)>,
    pub checks: Vec<Check>,
}

impl StageRecord {
    fn new(stage: Stage) -> Self {
        StageRecord {
            stage,
            sizes: Vec::new(),
            checks: Vec::new(),
        }
    }

    fn size(mut self, name: &str, value: usize) -> Self {
        self.sizes.push((name.into(), value));
        self
    }

    fn checks(mut self, checks: impl IntoIterator<Item = Check>) -> Self {
        self.checks.extend(checks);
        self
    }
}

/// `stage k=v ... | check; check`
impl fmt::Display for StageRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.stage)?;
        for (k, v) in &self.sizes {
            write!(f, " {k}={v}")?;
        }
        for (i, c) in self.checks.iter().enumerate() {
            write!(f, "{}{c}", if i == 0 { " | " } else { "; " })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, thiserror::Error)]
#[error("{stage}: {reason}")]
pub struct FailureReport {
    pub stage: Stage,
    pub reason: String,
    /// The violated inequality, when there is one.
    pub check: Option<Check>,
}

impl FailureReport {
    fn new(stage: Stage, reason: impl Into<String>) -> Self {
        FailureReport {
            stage,
            reason: reason.into(),
            check: None,
        }
    }

    pub fn slack(&self) -> Option<f64> {
        self.check.as_ref().map(Check::slack)
    }
}

/// Hooks into a pipeline run.
pub trait PipelineObserver {
    fn on_stage(&mut self, _record: &StageRecord) {}
    fn on_trace_back(&mut self, _event: &TraceEvent) {}
}

impl PipelineObserver for () {}

/// Records every stage.
#[derive(Default)]
pub struct StageLog(pub Vec<StageRecord>);

impl PipelineObserver for StageLog {
    fn on_stage(&mut self, record: &StageRecord) {
        self.0.push(record.clone());
    }
}

/// The robust core and what it was built from.
pub struct CoreRun {
    /// Input with colours renumbered by first appearance.
    pub canonical: LatinArray,
    /// `original[canonical colour]`.
    pub original: Vec<Colour>,
    pub full: ColouredBipartiteGraph,
    /// One edge per colour.
    pub g: ColouredBipartiteGraph,
    pub d: f64,
    pub dense: DenseSubpair,
    pub robust: RobustPair,
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub result: Result<RainbowMatching, FailureReport>,
    pub log: Vec<StageRecord>,
    pub augment: Option<AugmentReport>,
    pub reservation: Option<ReservationStats>,
}

impl PipelineOutcome {
    pub fn matching(&self) -> Option<&RainbowMatching> {
        self.result.as_ref().ok()
    }
}

/// Sub-seeds of one run.
mod tag {
    pub const PICK: u64 = 1;
    pub const DENSE: u64 = 2;
    pub const PRUNE: u64 = 3;
    pub const RESERVE: u64 = 4;
    pub const AUGMENT: u64 = 5;
    pub const M0: u64 = 6;
}

fn emit(observer: &mut dyn PipelineObserver, log: &mut Vec<StageRecord>, record: StageRecord) {
    observer.on_stage(&record);
    log.push(record);
}

fn first_hard_failure(stage: Stage, checks: &[Check]) -> Option<FailureReport> {
    checks.iter().find(|c| c.hard && !c.holds).map(|c| FailureReport {
        stage,
        reason: format!("violated {}", c.name),
        check: Some(c.clone()),
    })
}

/// The `⌈fraction·|part|⌉` highest-degree vertices of each side, ties to the
/// lower index.
fn top_degree_pair(g: &ColouredBipartiteGraph, fraction: f64) -> Subpair {
    let pick = |side: Side| {
        let mut part = g.part(side);
        let keep = ((fraction * part.len() as f64).ceil() as usize).clamp(1, part.len().max(1));
        part.sort_by_key(|&v| (std::cmp::Reverse(g.degree(side, v)), v));
        part.truncate(keep);
        part
    };
    Subpair::new(pick(Side::A), pick(Side::B))
}

fn pick_edges(canonical: &ColouredBipartiteGraph, seed: u64) -> ColouredBipartiteGraph {
    one_edge_per_colour(canonical, seed::derive(seed, tag::PICK))
}

/// The one-edge-per-colour graph a pipeline run with `seed` works in.
pub fn pipeline_graph(array: &LatinArray, seed: u64) -> ColouredBipartiteGraph {
    pick_edges(&ColouredBipartiteGraph::from_latin(&array.canonicalize_colours().0), seed)
}

/// Input checks, one edge per colour, the density increment and the pruning.
pub fn robust_core(
    array: &LatinArray,
    params: &PipelineParams,
    seed: u64,
    observer: &mut dyn PipelineObserver,
    log: &mut Vec<StageRecord>,
) -> Result<CoreRun, FailureReport> {
    let n = array.order();
    params
        .validate()
        .map_err(|e| FailureReport::new(Stage::Input, e.to_string()))?;
    to_graph(array).map_err(|e| FailureReport::new(Stage::Input, e.to_string()))?;
    let (canonical, original) = array.canonicalize_colours();
    let full = ColouredBipartiteGraph::from_latin(&canonical);
    let k = original.len();
    let d = k as f64 / (n * n) as f64;
    emit(
        observer,
        log,
        StageRecord::new(Stage::Input)
            .size("n", n)
            .size("k", k)
            .checks([
                Check::at_least("colours", k as f64, n as f64, true),
                Check::at_least("d-admissible", d, params.d_min(n), false),
            ]),
    );
    if k < n {
        return Err(FailureReport {
            stage: Stage::Input,
            reason: "fewer colours than rows".into(),
            check: Some(Check::at_least("colours", k as f64, n as f64, true)),
        });
    }

    let g = pick_edges(&full, seed);
    emit(
        observer,
        log,
        StageRecord::new(Stage::OneEdgePerColour)
            .size("edges", g.edge_count())
            .checks([Check::at_least("rainbow", g.edge_count() as f64, k as f64, true)]),
    );

    let start = if params.scaled {
        top_degree_pair(&g, params.core_fraction)
    } else {
        g.parts()
    };
    let dense_opts = DenseOptions {
        seed: seed::derive(seed, tag::DENSE),
        scaled: params.scaled,
        ..DenseOptions::default()
    };
    let dense = dense_subpair_from(&g, &start, &params.density, d, &dense_opts)
        .map_err(|e| FailureReport::new(Stage::DenseSubpair, e.to_string()))?;
    emit(
        observer,
        log,
        StageRecord::new(Stage::DenseSubpair)
            .size("a", dense.pair.len_a())
            .size("b", dense.pair.len_b())
            .size("iterations", dense.iterations)
            .checks([
                Check::at_least("density", dense.density, d * params.density.c_prime, false),
                Check::at_least("size-goal", dense.pair.len_a() as f64, dense.size_goal, false),
            ]),
    );

    let a_prime = dense.pair.len_a();
    let coef = params.effective_min_deg_coef(d, a_prime);
    let prune_params = DensityParams {
        epsilon: params.epsilon,
        ..params.density
    };
    let mut prune_opts = PruneOptions::default();
    prune_opts.expansion.seed = seed::derive(seed, tag::PRUNE);
    let robust = prune_to_robust(&g, &dense.pair, d, coef, &prune_params, &prune_opts)
        .map_err(|e| FailureReport::new(Stage::PruneToRobust, e.to_string()))?;
    let deleted = a_prime - robust.pair.len_a();
    emit(
        observer,
        log,
        StageRecord::new(Stage::PruneToRobust)
            .size("a1", robust.pair.len_a())
            .size("deleted", deleted)
            .size("exact", robust.exact as usize)
            .checks([
                Check::at_least(
                    "min-degree",
                    robust.min_degree_bound as f64,
                    robust.degree_threshold,
                    true,
                ),
                Check::at_most(
                    "deleted",
                    deleted as f64,
                    2.0 * params.epsilon * a_prime as f64,
                    false,
                ),
            ]),
    );
    Ok(CoreRun {
        canonical,
        original,
        full,
        g,
        d,
        dense,
        robust,
    })
}

/// Runs every stage; a returned matching is a verified transversal of `array`.
pub fn solve_pipeline(array: &LatinArray, params: &PipelineParams, seed: u64) -> PipelineOutcome {
    solve_pipeline_observed(array, params, seed, &mut ())
}

pub fn solve_pipeline_observed(
    array: &LatinArray,
    params: &PipelineParams,
    seed: u64,
    observer: &mut dyn PipelineObserver,
) -> PipelineOutcome {
    let mut outcome = PipelineOutcome {
        result: Err(FailureReport::new(Stage::Input, "not run")),
        log: Vec::new(),
        augment: None,
        reservation: None,
    };
    let mut log = Vec::new();
    outcome.result = run_stages(array, params, seed, observer, &mut log, &mut outcome);
    outcome.log = log;
    outcome
}

fn run_stages(
    array: &LatinArray,
    params: &PipelineParams,
    seed: u64,
    observer: &mut dyn PipelineObserver,
    log: &mut Vec<StageRecord>,
    outcome: &mut PipelineOutcome,
) -> Result<RainbowMatching, FailureReport> {
    let core = robust_core(array, params, seed, observer, log)?;
    let n = array.order();
    let d = core.d;
    let pair1 = &core.robust.pair;
    let a1 = pair1.len_a();

    let p = params.reserve_probability(n);
    let split = reserve_colours(&core.full, pair1, p, seed::derive(seed, tag::RESERVE));
    let stats = split.stats.clone();
    emit(
        observer,
        log,
        StageRecord::new(Stage::ReserveColours)
            .size("reserved", stats.reserved_colours)
            .size("g-star-edges", split.g_star.edge_count())
            .checks([
                Check::at_most("outside-band-b", stats.fraction_outside_b(), 0.01, false),
                Check::at_least("reserved-min-degree-b", stats.min_degree_b as f64, 1.0, false),
            ]),
    );
    outcome.reservation = Some(stats);

    let config = AugmentConfig {
        threshold: params.theta_threshold(n, a1),
        step_cap: params.step_cap(n),
    };
    let report = augmenting_rainbow(
        &split.g_star,
        seed::derive(seed, tag::AUGMENT),
        &config,
        &mut |ev| observer.on_trace_back(ev),
    );
    let m2 = report.matching.clone();
    if let Err(defect) = m2.verify(&split.g_star) {
        return Err(FailureReport::new(Stage::AugmentingRainbow, defect.to_string()));
    }
    let log_n = log2_ceil(n) as f64;
    emit(
        observer,
        log,
        StageRecord::new(Stage::AugmentingRainbow)
            .size("m2", m2.len())
            .size("greedy", report.greedy_size)
            .size("augmentations", report.augmentations)
            .size("trace-failures", report.trace_failures)
            .size("threshold", config.threshold)
            .checks([
                Check::at_least("benchmark", m2.len() as f64, report.benchmark, false),
                Check::at_most("reach-steps", report.max_reach_steps as f64, log_n, false),
                Check::at_most("trace-steps", report.max_trace_steps as f64, 4.0 * log_n, false),
            ]),
    );
    outcome.augment = Some(report);

    let g1 = core.g.induced(pair1);
    let Some(trimmed) = trim_core(&g1, &m2, d, params) else {
        return Err(FailureReport::new(Stage::TrimCore, "trim would empty the core"));
    };
    let leftovers = |side: Side| -> Vec<usize> {
        let core_mask = mask(trimmed.pair.part(side), n);
        let m2_mask = mask(&m2.edges().iter().map(|e| e.endpoint(side)).collect::<Vec<_>>(), n);
        (0..n).filter(|&v| !core_mask[v] && !m2_mask[v]).collect()
    };
    let a0 = leftovers(Side::A);
    let b0 = leftovers(Side::B);
    let mut checks = trimmed.checks.clone();
    checks.push(Check::at_least("leftovers-balanced", a0.len() as f64, b0.len() as f64, true));
    checks.push(Check::at_most("leftovers-balanced", a0.len() as f64, b0.len() as f64, true));
    checks.push(Check::at_most(
        "leftovers",
        a0.len() as f64,
        2.0 * params.trim_coef * d * a1 as f64,
        false,
    ));
    emit(
        observer,
        log,
        StageRecord::new(Stage::TrimCore)
            .size("a1-trimmed", trimmed.pair.len_a())
            .size("removed", trimmed.trimmed_a.len())
            .size("a0", a0.len())
            .size("b0", b0.len())
            .checks(checks.iter().cloned()),
    );
    if let Some(f) = first_hard_failure(Stage::TrimCore, &checks) {
        return Err(f);
    }

    let hard = classify_hard_leftovers(&core.full, &a0, &b0, &trimmed.pair, &m2, p * a1 as f64 / 4.0);
    emit(
        observer,
        log,
        StageRecord::new(Stage::ClassifyLeftovers)
            .size("hard-a", hard.a.len())
            .size("hard-b", hard.b.len())
            .checks(hard.checks.iter().cloned()),
    );

    let m0 = greedy_m0(
        &core.full,
        &split.reserved,
        &a0,
        &b0,
        &hard,
        &trimmed.pair,
        &m2,
        seed::derive(seed, tag::M0),
    )
    .map_err(|e| FailureReport::new(Stage::GreedyM0, e.to_string()))?;
    let m20 = RainbowMatching::union([&m2, &m0]);
    let m0_checks = [
        Check::at_least("m0-size", m0.len() as f64, (a0.len() + b0.len()) as f64, true),
        Check::at_least(
            "m2-m0-rainbow",
            m20.verify(&core.full).is_ok() as u8 as f64,
            1.0,
            true,
        ),
    ];
    emit(
        observer,
        log,
        StageRecord::new(Stage::GreedyM0)
            .size("m0", m0.len())
            .checks(m0_checks.iter().cloned()),
    );
    if let Some(f) = first_hard_failure(Stage::GreedyM0, &m0_checks) {
        return Err(f);
    }

    let coef = params.effective_min_deg_coef(d, core.dense.pair.len_a());
    let (info, m3) = finish_m3(&trimmed, &m0, a0.len(), coef * d * a1 as f64 / 2.0);
    let mut record = StageRecord::new(Stage::FinishM3)
        .size("a3", info.pair.len_a())
        .size("b3", info.pair.len_b())
        .checks(info.checks.iter().cloned());
    if let Ok(m3) = &m3 {
        record = record.size("m3", m3.len());
    }
    emit(observer, log, record);
    if let Some(f) = first_hard_failure(Stage::FinishM3, &info.checks) {
        return Err(f);
    }
    let m3 = m3.map_err(|e| FailureReport::new(Stage::FinishM3, e.to_string()))?;

    let all = RainbowMatching::union([&m2, &m0, &m3]).sorted();
    let verified = all.verify_perfect(&core.full);
    emit(
        observer,
        log,
        StageRecord::new(Stage::Assemble)
            .size("m2", m2.len())
            .size("m0", m0.len())
            .size("m3", m3.len())
            .checks([Check::at_least("verified", verified.is_ok() as u8 as f64, 1.0, true)]),
    );
    verified.map_err(|d| FailureReport::new(Stage::Assemble, d.to_string()))?;
    let mapped = map_back(&all, &core.original);
    let original = ColouredBipartiteGraph::from_latin(array);
    mapped
        .verify_perfect(&original)
        .map_err(|d| FailureReport::new(Stage::Assemble, d.to_string()))?;
    Ok(mapped)
}

fn map_back(m: &RainbowMatching, original: &[Colour]) -> RainbowMatching {
    RainbowMatching::new(
        m.edges()
            .iter()
            .map(|e| Edge::new(e.a(), e.b(), original[e.colour as usize]))
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Pipeline,
    Augmenting,
}

#[derive(Clone, Debug)]
pub struct AutoOutcome {
    pub matching: Option<RainbowMatching>,
    /// The method that produced the answer; for "none found" the last tried.
    pub method: Method,
    /// "None found" is a proof of absence.
    pub authoritative: bool,
    pub pipeline_failure: Option<FailureReport>,
}

/// Orders up to this size go to the exact search.
pub const AUTO_EXACT_MAX_ORDER: usize = 9;
pub const AUTO_RESTARTS: u64 = 8;

/// Exact search for small orders, else the pipeline, else augmentation on
/// one edge per colour with seeded restarts.
pub fn solve_auto(array: &LatinArray, seed: u64) -> AutoOutcome {
    let n = array.order();
    if n <= AUTO_EXACT_MAX_ORDER {
        return AutoOutcome {
            matching: find_transversal_exact(array),
            method: Method::Exact,
            authoritative: true,
            pipeline_failure: None,
        };
    }
    let outcome = solve_pipeline(array, &PipelineParams::default(), seed);
    let failure = match outcome.result {
        Ok(m) => {
            return AutoOutcome {
                matching: Some(m),
                method: Method::Pipeline,
                authoritative: false,
                pipeline_failure: None,
            }
        }
        Err(f) => f,
    };
    AutoOutcome {
        matching: augment_restarts(array, seed, AUTO_RESTARTS),
        method: Method::Augmenting,
        authoritative: false,
        pipeline_failure: Some(failure),
    }
}

/// Augmentation on one edge per colour of `array`, up to `restarts` times;
/// a verified transversal or nothing.
pub fn augment_restarts(array: &LatinArray, seed: u64, restarts: u64) -> Option<RainbowMatching> {
    let full = to_graph(array).ok()?;
    let m = augment_best(array, seed, restarts)?;
    m.verify_perfect(&full).is_ok().then_some(m)
}

/// The largest rainbow matching over the restarts, stopping early at a
/// perfect one. `None` for an invalid array.
pub fn augment_best(array: &LatinArray, seed: u64, restarts: u64) -> Option<RainbowMatching> {
    let full = to_graph(array).ok()?;
    let n = array.order();
    let config = AugmentConfig {
        threshold: 1,
        step_cap: PipelineParams::default().step_cap(n),
    };
    let mut best = RainbowMatching::empty();
    for r in 0..restarts.max(1) {
        let g = one_edge_per_colour(&full, seed::derive_path(seed, &[0xa0, r]));
        let report = augmenting_rainbow(&g, seed::derive_path(seed, &[0xa1, r]), &config, &mut |_| {});
        if report.final_size > best.len() {
            best = report.matching.sorted();
        }
        if best.len() == n {
            break;
        }
    }
    Some(best)
}
