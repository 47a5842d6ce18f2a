//! `(ε, δ)`-density, dense-subpair extraction by density increment, and the
//! deletion procedure producing a robustly matchable pair.

use num_rational::Ratio;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::engine::{
    expansion_check_with, find_small_violator, ExpansionOptions, ExpansionSpec, ExpansionVerdict,
    SearchOutcome,
};
use crate::error::Error;
use crate::graph::{ColouredBipartiteGraph, Side, Subpair};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensityParams {
    pub epsilon: f64,
    pub c: f64,
    pub c_prime: f64,
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams {
            epsilon: 0.1,
            c: 0.24,
            c_prime: 1.0 / 50.0,
        }
    }
}

impl DensityParams {
    pub fn validate(&self) -> Result<(), Error> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !unit(self.epsilon) || !unit(self.c) || !unit(self.c_prime) {
            return Err(Error::Parameter(
                "epsilon, c and c_prime must lie in (0, 1)".into(),
            ));
        }
        if 4.0 * self.c + self.c_prime > 1.0 + 1e-12 {
            return Err(Error::Parameter(format!(
                "4c + c' = {} exceeds 1",
                4.0 * self.c + self.c_prime
            )));
        }
        Ok(())
    }

    /// Density growth factor per increment step, `1 + c·ε`.
    pub fn increment(&self) -> f64 {
        1.0 + self.c * self.epsilon
    }

    /// `2 / log2(1 + c·ε)`.
    pub fn size_exponent(&self) -> f64 {
        2.0 / self.increment().log2()
    }

    /// Upper bound on increment steps starting from density `d`.
    pub fn max_increments(&self, d: f64) -> usize {
        ((1.0 / d).ln() / self.increment().ln()).ceil().max(0.0) as usize
    }
}

fn edges_between(graph: &ColouredBipartiteGraph, in_a: &[bool], in_b: &[bool]) -> u64 {
    graph
        .edges()
        .iter()
        .filter(|e| in_a[e.a()] && in_b[e.b()])
        .count() as u64
}

/// `e(A', B') / (|A'| |B'|)`.
pub fn density(graph: &ColouredBipartiteGraph, pair: &Subpair) -> Result<Ratio<u64>, Error> {
    if pair.len_a() == 0 || pair.len_b() == 0 {
        return Err(Error::EmptyPart);
    }
    pair.check_range(graph.size_a(), graph.size_b())?;
    let e = edges_between(
        graph,
        &pair.mask_a(graph.size_a()),
        &pair.mask_b(graph.size_b()),
    );
    Ok(Ratio::new(e, (pair.len_a() * pair.len_b()) as u64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DenseOptions {
    /// Threshold subsets enumerated on the cheaper side before falling back
    /// to sampling.
    pub exact_budget: u64,
    pub samples: usize,
    pub seed: u64,
    /// Raise the witness size to [`chance_floor`].
    pub scaled: bool,
}

impl Default for DenseOptions {
    fn default() -> Self {
        DenseOptions {
            exact_budget: 1 << 16,
            samples: 200,
            seed: 0,
            scaled: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensityVerdict {
    Dense { exact: bool },
    Sparse { witness: Subpair, density: Ratio<u64> },
}

impl DensityVerdict {
    pub fn is_dense(&self) -> bool {
        matches!(self, DensityVerdict::Dense { .. })
    }
}

fn binomial_within(m: usize, s: usize, budget: u64) -> bool {
    let s = s.min(m - s);
    let mut acc: u128 = 1;
    for i in 0..s {
        acc = acc * (m - i) as u128 / (i + 1) as u128;
        if acc > budget as u128 {
            return false;
        }
    }
    true
}

/// Sparsest threshold-size rectangles. The minimum density over pairs with
/// `|A'| >= ε|A|`, `|B'| >= ε|B|` is attained at exactly the threshold sizes,
/// since a larger rectangle's density is the average over its threshold-size
/// sub-rectangles.
struct Rectangles<'a> {
    graph: &'a ColouredBipartiteGraph,
    part_a: Vec<usize>,
    part_b: Vec<usize>,
    size_a: usize,
    size_b: usize,
}

impl<'a> Rectangles<'a> {
    fn new(graph: &'a ColouredBipartiteGraph, epsilon: f64) -> Self {
        let part_a = graph.part_a();
        let part_b = graph.part_b();
        let size_a = ((epsilon * part_a.len() as f64).ceil() as usize).clamp(1, part_a.len());
        let size_b = ((epsilon * part_b.len() as f64).ceil() as usize).clamp(1, part_b.len());
        Rectangles {
            graph,
            part_a,
            part_b,
            size_a,
            size_b,
        }
    }

    /// For fixed vertices on `side`, the sparsest choice on the other side
    /// and its edge count.
    fn best_response(&self, side: Side, chosen: &[usize], count: &mut [u32]) -> (Vec<usize>, u64) {
        let (others, k) = match side {
            Side::A => (&self.part_b, self.size_b),
            Side::B => (&self.part_a, self.size_a),
        };
        for &v in chosen {
            for e in self.graph.edges_at(side, v) {
                count[e.endpoint(side.other())] += 1;
            }
        }
        let mut ranked: Vec<(u32, usize)> = others.iter().map(|&w| (count[w], w)).collect();
        if k < ranked.len() {
            ranked.select_nth_unstable(k);
        }
        ranked.truncate(k);
        for &v in chosen {
            for e in self.graph.edges_at(side, v) {
                count[e.endpoint(side.other())] = 0;
            }
        }
        let edges = ranked.iter().map(|&(c, _)| c as u64).sum();
        let mut picked: Vec<usize> = ranked.into_iter().map(|(_, w)| w).collect();
        picked.sort_unstable();
        (picked, edges)
    }

    fn rectangle(&self, side: Side, chosen: Vec<usize>, response: Vec<usize>) -> Subpair {
        match side {
            Side::A => Subpair::new(chosen, response),
            Side::B => Subpair::new(response, chosen),
        }
    }

    /// Exhaustive over threshold subsets of `side`.
    fn exact(&self, side: Side) -> (Subpair, u64) {
        let part = match side {
            Side::A => &self.part_a,
            Side::B => &self.part_b,
        };
        let s = match side {
            Side::A => self.size_a,
            Side::B => self.size_b,
        };
        let mut count = vec![0u32; self.graph.side_size(side.other())];
        let mut idx: Vec<usize> = (0..s).collect();
        let mut best: Option<(Vec<usize>, Vec<usize>, u64)> = None;
        loop {
            let chosen: Vec<usize> = idx.iter().map(|&i| part[i]).collect();
            let (response, e) = self.best_response(side, &chosen, &mut count);
            if best.as_ref().is_none_or(|b| e < b.2) {
                best = Some((chosen, response, e));
            }
            // Next combination in lexicographic order.
            let m = part.len();
            let Some(i) = (0..s).rev().find(|&i| idx[i] != i + m - s) else {
                break;
            };
            idx[i] += 1;
            for j in i + 1..s {
                idx[j] = idx[j - 1] + 1;
            }
        }
        let (chosen, response, e) = best.expect("at least one combination");
        (self.rectangle(side, chosen, response), e)
    }

    /// Random threshold subsets of A improved by alternating best responses.
    fn sampled(&self, samples: usize, seed: u64) -> (Subpair, u64) {
        let mut rng = seed::rng(seed);
        let mut count_b = vec![0u32; self.graph.size_b()];
        let mut count_a = vec![0u32; self.graph.size_a()];
        let mut best: Option<(Subpair, u64)> = None;
        for _ in 0..samples.max(1) {
            let mut chosen_a: Vec<usize> = sample(&mut rng, self.part_a.len(), self.size_a)
                .into_iter()
                .map(|i| self.part_a[i])
                .collect();
            chosen_a.sort_unstable();
            let (mut chosen_b, mut e) = self.best_response(Side::A, &chosen_a, &mut count_b);
            loop {
                let (next_a, e_a) = self.best_response(Side::B, &chosen_b, &mut count_a);
                if e_a >= e {
                    break;
                }
                let (next_b, e_b) = self.best_response(Side::A, &next_a, &mut count_b);
                chosen_a = next_a;
                chosen_b = next_b;
                e = e_a.min(e_b);
            }
            let pair = Subpair::new(chosen_a.clone(), chosen_b.clone());
            if best.as_ref().is_none_or(|b| e < b.1) {
                best = Some((pair, e));
            }
        }
        best.expect("at least one sample")
    }
}

/// Whether every pair with parts at least `epsilon` times the present parts
/// has density at least `delta`. Exact whenever the threshold subsets of one
/// side fit the enumeration budget; sampled otherwise. Witnesses are always
/// recomputed.
pub fn is_dense(
    graph: &ColouredBipartiteGraph,
    epsilon: f64,
    delta: f64,
    options: &DenseOptions,
) -> DensityVerdict {
    let r = Rectangles::new(graph, epsilon);
    if r.part_a.is_empty() || r.part_b.is_empty() {
        return DensityVerdict::Dense { exact: true };
    }
    let exact_a = binomial_within(r.part_a.len(), r.size_a, options.exact_budget);
    let exact_b = binomial_within(r.part_b.len(), r.size_b, options.exact_budget);
    let exact = exact_a || exact_b;
    let (witness, e) = if exact_a {
        r.exact(Side::A)
    } else if exact_b {
        r.exact(Side::B)
    } else {
        r.sampled(options.samples, options.seed)
    };
    let area = (r.size_a * r.size_b) as u64;
    if (e as f64) < delta * area as f64 {
        let check = density(graph, &witness).expect("witness parts are non-empty");
        assert_eq!(check, Ratio::new(e, area), "density witness failed recomputation");
        DensityVerdict::Sparse {
            witness,
            density: check,
        }
    } else {
        DensityVerdict::Dense { exact }
    }
}

/// Result of [`dense_subpair`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseSubpair {
    pub pair: Subpair,
    pub density: f64,
    pub iterations: usize,
    /// The final density test was exhaustive.
    pub exact: bool,
    /// `d^{sizeExponent} m / 2`, `m` the larger part of the start pair.
    pub size_goal: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DenseFailure {
    #[error("density increment stalled at density {reached:.4}, target {target:.4}")]
    IncrementStalled { reached: f64, target: f64 },
    #[error("pair size {size} below the floor {floor:.3}")]
    SizeFloor { size: usize, floor: f64 },
    #[error("density {actual:.4} below the stated d = {d:.4}")]
    BelowDensity { actual: f64, d: f64 },
}

/// Mutable view of a subpair with in-pair degrees.
struct PairState<'a> {
    graph: &'a ColouredBipartiteGraph,
    in_a: Vec<bool>,
    in_b: Vec<bool>,
    deg_a: Vec<usize>,
    deg_b: Vec<usize>,
    len_a: usize,
    len_b: usize,
    edges: u64,
}

impl<'a> PairState<'a> {
    fn new(graph: &'a ColouredBipartiteGraph, pair: &Subpair) -> Self {
        let mut in_a = pair.mask_a(graph.size_a());
        let mut in_b = pair.mask_b(graph.size_b());
        for a in 0..graph.size_a() {
            in_a[a] &= graph.contains_a(a);
        }
        for b in 0..graph.size_b() {
            in_b[b] &= graph.contains_b(b);
        }
        let mut deg_a = vec![0; graph.size_a()];
        let mut deg_b = vec![0; graph.size_b()];
        let mut edges = 0;
        for e in graph.edges() {
            if in_a[e.a()] && in_b[e.b()] {
                deg_a[e.a()] += 1;
                deg_b[e.b()] += 1;
                edges += 1;
            }
        }
        PairState {
            graph,
            len_a: in_a.iter().filter(|&&x| x).count(),
            len_b: in_b.iter().filter(|&&x| x).count(),
            in_a,
            in_b,
            deg_a,
            deg_b,
            edges,
        }
    }

    fn contains(&self, side: Side, v: usize) -> bool {
        match side {
            Side::A => self.in_a[v],
            Side::B => self.in_b[v],
        }
    }

    fn degree(&self, side: Side, v: usize) -> usize {
        match side {
            Side::A => self.deg_a[v],
            Side::B => self.deg_b[v],
        }
    }

    fn density(&self) -> f64 {
        if self.len_a == 0 || self.len_b == 0 {
            return 0.0;
        }
        self.edges as f64 / (self.len_a * self.len_b) as f64
    }

    fn members(&self, side: Side) -> impl Iterator<Item = usize> + '_ {
        let mask = match side {
            Side::A => &self.in_a,
            Side::B => &self.in_b,
        };
        mask.iter().enumerate().filter(|(_, &x)| x).map(|(v, _)| v)
    }

    fn remove(&mut self, side: Side, v: usize) {
        debug_assert!(self.contains(side, v));
        match side {
            Side::A => {
                self.in_a[v] = false;
                self.len_a -= 1;
            }
            Side::B => {
                self.in_b[v] = false;
                self.len_b -= 1;
            }
        }
        for e in self.graph.edges_at(side, v) {
            let w = e.endpoint(side.other());
            if self.contains(side.other(), w) {
                match side {
                    Side::A => self.deg_b[w] -= 1,
                    Side::B => self.deg_a[w] -= 1,
                }
                self.edges -= 1;
            }
        }
        match side {
            Side::A => self.deg_a[v] = 0,
            Side::B => self.deg_b[v] = 0,
        }
    }

    /// Lowest-degree member of `side`, lowest index on ties.
    fn weakest(&self, side: Side) -> Option<usize> {
        self.members(side).min_by_key(|&v| (self.degree(side, v), v))
    }

    /// Drops lowest-degree vertices from the larger side until balanced.
    fn equalize(&mut self) {
        while self.len_a != self.len_b {
            let side = if self.len_a > self.len_b { Side::A } else { Side::B };
            let v = self.weakest(side).unwrap();
            self.remove(side, v);
        }
    }

    fn subpair(&self) -> Subpair {
        Subpair::new(self.members(Side::A).collect(), self.members(Side::B).collect())
    }
}

/// [`dense_subpair_from`] starting from all present vertices.
pub fn dense_subpair(
    graph: &ColouredBipartiteGraph,
    params: &DensityParams,
    d: f64,
    options: &DenseOptions,
) -> Result<DenseSubpair, DenseFailure> {
    dense_subpair_from(graph, &graph.parts(), params, d, options)
}

/// Density increment: while the current pair has a sparse witness, peel each
/// witness-induced quadrant or half whose parts keep an `ε` fraction until
/// its density has grown by `1 + c·ε`, move to the largest one that gets
/// there, and rebalance. Each step multiplies the density by at least
/// `1 + c·ε`, so the loop ends after [`DensityParams::max_increments`] steps.
pub fn dense_subpair_from(
    graph: &ColouredBipartiteGraph,
    start: &Subpair,
    params: &DensityParams,
    d: f64,
    options: &DenseOptions,
) -> Result<DenseSubpair, DenseFailure> {
    let mut state = PairState::new(graph, start);
    let n = state.len_a.max(state.len_b);
    let size_goal = d.powf(params.size_exponent()) * n as f64 / 2.0;
    state.equalize();
    let first = state.density();
    if first + 1e-12 < d && start == &graph.parts() {
        return Err(DenseFailure::BelowDensity { actual: first, d });
    }
    let mut iterations = 0;
    loop {
        if state.len_a == 0 {
            return Err(DenseFailure::SizeFloor {
                size: 0,
                floor: size_goal,
            });
        }
        let current = state.subpair();
        let d_cur = state.density();
        let view = graph.induced(&current);
        let step_options = DenseOptions {
            seed: seed::derive(options.seed, iterations as u64),
            ..*options
        };
        let epsilon = if options.scaled {
            let floor = chance_floor(state.len_a.min(state.len_b), d_cur);
            params.epsilon.max(floor as f64 / state.len_a.max(1) as f64)
        } else {
            params.epsilon
        };
        let witness = match is_dense(&view, epsilon, params.c_prime * d_cur, &step_options) {
            DensityVerdict::Dense { .. } if (state.len_a as f64) < size_goal => {
                return Err(DenseFailure::SizeFloor {
                    size: state.len_a,
                    floor: size_goal,
                })
            }
            DensityVerdict::Dense { exact } => {
                return Ok(DenseSubpair {
                    density: d_cur,
                    pair: current,
                    iterations,
                    exact,
                    size_goal,
                })
            }
            DensityVerdict::Sparse { witness, .. } => witness,
        };
        let target = (params.increment() * d_cur).min(1.0);
        let min_a = ((epsilon * state.len_a as f64).ceil() as usize).max(1);
        let min_b = ((epsilon * state.len_b as f64).ceil() as usize).max(1);
        let mut next = None;
        let mut reached = 0.0f64;
        for mut cand in candidates(graph, &state, &witness, min_a, min_b) {
            if peel_to(&mut cand, target, min_a, min_b) {
                let key = |s: &PairState| (s.len_a.min(s.len_b), s.density());
                if next.as_ref().is_none_or(|b: &PairState| key(&cand) > key(b)) {
                    next = Some(cand);
                }
            } else {
                reached = reached.max(cand.density());
            }
        }
        let Some(mut next) = next else {
            return Err(DenseFailure::IncrementStalled { reached, target });
        };
        next.equalize();
        state = next;
        iterations += 1;
    }
}

/// Peels lowest-degree vertices, never below the size minimums, until the
/// density reaches `target`.
fn peel_to(next: &mut PairState, target: f64, min_a: usize, min_b: usize) -> bool {
    while next.density() < target {
        let va = next.weakest(Side::A).filter(|_| next.len_a > min_a);
        let vb = next.weakest(Side::B).filter(|_| next.len_b > min_b);
        // Peel the vertex whose removal raises the density more.
        let choice = match (va, vb) {
            (Some(a), Some(b)) => {
                let gain_a = next.len_b as f64 * next.degree(Side::A, a) as f64;
                let gain_b = next.len_a as f64 * next.degree(Side::B, b) as f64;
                if gain_a <= gain_b {
                    (Side::A, a)
                } else {
                    (Side::B, b)
                }
            }
            (Some(a), None) => (Side::A, a),
            (None, Some(b)) => (Side::B, b),
            (None, None) => return false,
        };
        next.remove(choice.0, choice.1);
    }
    true
}

/// The four quadrants and four halves cut by the witness that meet the size
/// minimums.
fn candidates<'a>(
    graph: &'a ColouredBipartiteGraph,
    state: &PairState<'a>,
    witness: &Subpair,
    min_a: usize,
    min_b: usize,
) -> Vec<PairState<'a>> {
    let wa = witness.mask_a(graph.size_a());
    let wb = witness.mask_b(graph.size_b());
    let in_a: Vec<usize> = state.members(Side::A).filter(|&a| wa[a]).collect();
    let out_a: Vec<usize> = state.members(Side::A).filter(|&a| !wa[a]).collect();
    let in_b: Vec<usize> = state.members(Side::B).filter(|&b| wb[b]).collect();
    let out_b: Vec<usize> = state.members(Side::B).filter(|&b| !wb[b]).collect();
    let all_a: Vec<usize> = state.members(Side::A).collect();
    let all_b: Vec<usize> = state.members(Side::B).collect();
    [
        (&in_a, &in_b),
        (&in_a, &out_b),
        (&out_a, &in_b),
        (&out_a, &out_b),
        (&in_a, &all_b),
        (&out_a, &all_b),
        (&all_a, &in_b),
        (&all_a, &out_b),
    ]
    .into_iter()
    .filter(|(pa, pb)| pa.len() >= min_a && pb.len() >= min_b)
    .map(|(pa, pb)| PairState::new(graph, &Subpair::new(pa.clone(), pb.clone())))
    .collect()
}

/// Smallest `s` for which a uniformly random `m × m` bipartite graph of
/// density `d` has fewer than one empty `s × s` block in expectation.
pub fn chance_floor(m: usize, d: f64) -> usize {
    if m == 0 || d >= 1.0 {
        return 1;
    }
    if d <= 0.0 {
        return m;
    }
    let ln_miss = (1.0 - d).ln();
    let mut ln_binom = 0.0;
    for s in 1..=m {
        ln_binom += ((m - s + 1) as f64 / s as f64).ln();
        if 2.0 * ln_binom + (s * s) as f64 * ln_miss < 0.0 {
            return s;
        }
    }
    m
}

/// One step of [`prune_to_robust`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deletion {
    pub kind: DeletionKind,
    pub side: Side,
    pub vertices: Vec<usize>,
    /// Equal-size deletion from the other side.
    pub rebalanced: Vec<usize>,
    /// `|N(S)|` for type (ii), the degree for type (i).
    pub witness: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeletionKind {
    LowDegree,
    PoorExpansion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustPair {
    pub pair: Subpair,
    /// Smallest in-pair degree, which exceeds `degree_threshold`.
    pub min_degree_bound: usize,
    pub degree_threshold: f64,
    pub expansion: ExpansionSpec,
    pub provenance: Vec<Deletion>,
    /// False if any small-set search used the local search.
    pub exact: bool,
    pub initial_size: usize,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("deleted {deleted_a} + {deleted_b} vertices, reaching the limit {limit:.2} per side")]
pub struct PruneFailure {
    pub deleted_a: usize,
    pub deleted_b: usize,
    pub limit: f64,
    pub provenance: Vec<Deletion>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PruneOptions {
    pub expansion: ExpansionOptions,
}

impl Default for PruneOptions {
    fn default() -> Self {
        PruneOptions {
            expansion: ExpansionOptions {
                exact_limit: EXACT_PRUNE_LIMIT,
                ..ExpansionOptions::default()
            },
        }
    }
}

/// Parts up to this size get an exhaustive small-set search while pruning.
pub const EXACT_PRUNE_LIMIT: usize = 24;

/// Deletes (i) vertices of in-pair degree at most `min_deg_coef · d · |A'|`
/// and (ii) sets `S` with `|S| < ε|A'|` and `|N(S)| <= 2|S|`, each time
/// removing as many lowest-index vertices from the other side. Type (i) is
/// exhausted first; A is searched before B. Stops when nothing is deletable
/// (success) or when `2ε|A'|` vertices are gone from each side (failure).
pub fn prune_to_robust(
    graph: &ColouredBipartiteGraph,
    pair: &Subpair,
    d: f64,
    min_deg_coef: f64,
    params: &DensityParams,
    options: &PruneOptions,
) -> Result<RobustPair, PruneFailure> {
    let mut state = PairState::new(graph, pair);
    let initial = state.len_a.min(state.len_b);
    let threshold = min_deg_coef * d * initial as f64;
    let small = ((params.epsilon * initial as f64).ceil() as usize).saturating_sub(1);
    let limit = 2.0 * params.epsilon * initial as f64;
    let mut log = Vec::new();
    let mut deleted = [0usize; 2];
    let mut exact = true;
    let mut step = 0u64;
    loop {
        if state.len_a == 0 || (deleted[0] as f64 >= limit && deleted[1] as f64 >= limit) {
            return Err(PruneFailure {
                deleted_a: deleted[0],
                deleted_b: deleted[1],
                limit,
                provenance: log,
            });
        }
        let low = [Side::A, Side::B].into_iter().find_map(|side| {
            state
                .members(side)
                .find(|&v| state.degree(side, v) as f64 <= threshold)
                .map(|v| (side, v))
        });
        let (kind, side, set, witness) = if let Some((side, v)) = low {
            (DeletionKind::LowDegree, side, vec![v], state.degree(side, v))
        } else {
            let view = graph.induced(&state.subpair());
            let mut found = None;
            for side in [Side::A, Side::B] {
                let opts = ExpansionOptions {
                    seed: seed::derive(options.expansion.seed, step * 2 + side as u64),
                    ..options.expansion
                };
                match find_small_violator(&view, side, &|s| 2 * s + 1, small, &opts) {
                    SearchOutcome::Found(s) => {
                        found = Some((side, s));
                        break;
                    }
                    SearchOutcome::NotFound { exact: e } => exact &= e,
                }
            }
            match found {
                Some((side, s)) => {
                    let nb = crate::engine::neighbourhood_size(&view, side, &s);
                    (DeletionKind::PoorExpansion, side, s, nb)
                }
                None => break,
            }
        };
        for &v in &set {
            state.remove(side, v);
        }
        let rebalanced: Vec<usize> = state.members(side.other()).take(set.len()).collect();
        for &v in &rebalanced {
            state.remove(side.other(), v);
        }
        deleted[side as usize] += set.len();
        deleted[side.other() as usize] += rebalanced.len();
        log.push(Deletion {
            kind,
            side,
            vertices: set,
            rebalanced,
            witness,
        });
        step += 1;
    }
    let result = state.subpair();
    let min_degree_bound = [Side::A, Side::B]
        .into_iter()
        .flat_map(|side| state.members(side).map(move |v| (side, v)))
        .map(|(side, v)| state.degree(side, v))
        .min()
        .unwrap_or(0);
    Ok(RobustPair {
        expansion: ExpansionSpec::for_part(result.len_a()),
        pair: result,
        min_degree_bound,
        degree_threshold: threshold,
        provenance: log,
        exact,
        initial_size: initial,
    })
}

/// Post-hoc certificate for a robust pair: recomputed minimum degree and the
/// expansion verdict on both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustCertificate {
    pub min_degree: usize,
    pub degree_ok: bool,
    pub expansion_a: ExpansionVerdict,
    pub expansion_b: ExpansionVerdict,
}

impl RobustCertificate {
    pub fn holds(&self) -> bool {
        self.degree_ok && self.expansion_a.holds() && self.expansion_b.holds()
    }

    pub fn exact(&self) -> bool {
        [&self.expansion_a, &self.expansion_b]
            .iter()
            .all(|v| !matches!(v, ExpansionVerdict::Holds { exact: false }))
    }
}

pub fn certify_robust_pair(
    graph: &ColouredBipartiteGraph,
    robust: &RobustPair,
    options: &ExpansionOptions,
) -> RobustCertificate {
    let g1 = graph.induced(&robust.pair);
    let min_degree = g1.min_degree();
    RobustCertificate {
        min_degree,
        degree_ok: robust.pair.len_a() > 0 && min_degree as f64 > robust.degree_threshold,
        expansion_a: expansion_check_with(&g1, Side::A, robust.expansion, options),
        expansion_b: expansion_check_with(&g1, Side::B, robust.expansion, options),
    }
}
