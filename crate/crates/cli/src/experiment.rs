//! Seeded sweeps over order and colour density.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use transversal::generators::{default_mixing, Family, GenSpec};
use transversal::oracle::find_transversal_exact;
use transversal::rainbow::{augment_best, solve_auto, solve_pipeline, PipelineParams, AUTO_RESTARTS};
use transversal::{seed, verify_rainbow_perfect, ColouredBipartiteGraph, Error, RainbowMatching};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Auto,
    Pipeline,
    Exact,
    Greedy,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Auto => "auto",
            Solver::Pipeline => "pipeline",
            Solver::Exact => "exact",
            Solver::Greedy => "greedy",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n_values: Vec<usize>,
    /// `k = ⌈d·n²⌉` for each `d`.
    pub colour_fractions: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_solver")]
    pub solver: Solver,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
    /// Jacobson–Matthews moves per instance; `n³` when absent.
    #[serde(default)]
    pub mixing_steps: Option<u64>,
    /// Pipeline parameters for the pipeline and auto solvers.
    #[serde(default)]
    pub params: Option<PipelineParams>,
}

fn default_solver() -> Solver {
    Solver::Auto
}

pub fn colour_target(n: usize, d: f64) -> usize {
    ((d * (n * n) as f64) - 1e-9).ceil() as usize
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::Parameter(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n_values.is_empty() || self.colour_fractions.is_empty() {
            return bad("n_values and colour_fractions must be non-empty".into());
        }
        for &d in &self.colour_fractions {
            if !(d > 0.0 && d <= 1.0) {
                return bad(format!("colour fraction {d} outside (0, 1]"));
            }
        }
        for &n in &self.n_values {
            if n == 0 {
                return bad("orders must be positive".into());
            }
            for &d in &self.colour_fractions {
                let k = colour_target(n, d);
                if k < n {
                    return bad(format!("n = {n}, d = {d} gives {k} colours, fewer than n"));
                }
            }
        }
        if let Some(p) = &self.params {
            p.validate()?;
        }
        Ok(())
    }

    /// Every `(n, d index, d)` cell in output order.
    pub fn cells(&self) -> Vec<(usize, usize, f64)> {
        self.n_values
            .iter()
            .flat_map(|&n| self.colour_fractions.iter().enumerate().map(move |(i, &d)| (n, i, d)))
            .collect()
    }
}

/// One trial. Column order is the CSV header order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub d: f64,
    pub k: usize,
    pub seed: u64,
    pub solver: String,
    pub success: bool,
    pub size: usize,
    pub stage_failed: Option<String>,
    pub wall_ms: Option<u64>,
}

pub const CSV_HEADER: &str = "n,d,k,seed,solver,success,size,stage_failed,wall_ms";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub d: f64,
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_size: f64,
    pub mean_wall_ms: Option<f64>,
}

pub fn trial_seed(master: u64, n: usize, d_index: usize, trial: usize) -> u64 {
    seed::derive_path(master, &[n as u64, d_index as u64, trial as u64])
}

pub fn run_trial(spec: &ExperimentSpec, n: usize, d_index: usize, d: f64, trial: usize, timing: bool) -> Row {
    let s = trial_seed(spec.master_seed, n, d_index, trial);
    let k = colour_target(n, d);
    let gen = GenSpec {
        n,
        target_colours: Some(k),
        family: Family::Split,
        seed: s,
        mixing_steps: Some(spec.mixing_steps.unwrap_or_else(|| default_mixing(n))),
    };
    let array = gen.generate().expect("validated spec generates");
    let start = Instant::now();
    let params = spec.params.clone().unwrap_or_default();
    let (matching, stage_failed): (Option<RainbowMatching>, Option<String>) = match spec.solver {
        Solver::Exact => (find_transversal_exact(&array), None),
        Solver::Pipeline => {
            let out = solve_pipeline(&array, &params, s);
            match out.result {
                Ok(m) => (Some(m), None),
                Err(f) => (None, Some(f.stage.to_string())),
            }
        }
        Solver::Greedy => (augment_best(&array, s, AUTO_RESTARTS), None),
        Solver::Auto => {
            let out = solve_auto(&array, s);
            (out.matching, out.pipeline_failure.map(|f| f.stage.to_string()))
        }
    };
    let wall = start.elapsed().as_millis() as u64;
    let graph = ColouredBipartiteGraph::from_latin(&array);
    let size = matching.as_ref().map_or(0, |m| m.len());
    let success = matching.as_ref().is_some_and(|m| verify_rainbow_perfect(&graph, m));
    Row {
        n,
        d,
        k,
        seed: s,
        solver: spec.solver.name().into(),
        success,
        size,
        stage_failed,
        wall_ms: timing.then_some(wall),
    }
}

pub fn aggregate(rows: &[Row]) -> Vec<Aggregate> {
    let mut out: Vec<Aggregate> = Vec::new();
    let mut groups: Vec<Vec<&Row>> = Vec::new();
    for r in rows {
        match groups.last_mut() {
            Some(g) if g[0].n == r.n && g[0].d == r.d => g.push(r),
            _ => groups.push(vec![r]),
        }
    }
    for g in groups {
        let trials = g.len();
        let successes = g.iter().filter(|r| r.success).count();
        let mean = |f: &dyn Fn(&Row) -> f64| g.iter().map(|r| f(r)).sum::<f64>() / trials as f64;
        let timed = g.iter().all(|r| r.wall_ms.is_some());
        out.push(Aggregate {
            n: g[0].n,
            d: g[0].d,
            k: g[0].k,
            trials,
            successes,
            success_rate: successes as f64 / trials as f64,
            mean_size: mean(&|r| r.size as f64),
            mean_wall_ms: timed.then(|| mean(&|r| r.wall_ms.unwrap_or(0) as f64)),
        });
    }
    out
}

/// Streams rows for one format; CSV and JSON rows carry the same fields.
pub struct TableWriter<W: Write> {
    format: Format,
    csv: Option<csv::Writer<W>>,
    raw: Option<W>,
    rows: usize,
}

impl<W: Write> TableWriter<W> {
    pub fn new(format: Format, out: W) -> std::io::Result<Self> {
        match format {
            Format::Csv => Self::with_header(out, CSV_HEADER),
            Format::Json => {
                let mut out = out;
                out.write_all(b"[")?;
                Ok(TableWriter {
                    format,
                    csv: None,
                    raw: Some(out),
                    rows: 0,
                })
            }
        }
    }

    /// CSV with the given comma-separated header.
    pub fn with_header(out: W, header: &str) -> std::io::Result<Self> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(header.split(','))?;
        Ok(TableWriter {
            format: Format::Csv,
            csv: Some(w),
            raw: None,
            rows: 0,
        })
    }

    pub fn write<T: Serialize>(&mut self, item: &T) -> std::io::Result<()> {
        match self.format {
            Format::Csv => self.csv.as_mut().unwrap().serialize(item)?,
            Format::Json => {
                let w = self.raw.as_mut().unwrap();
                let sep = if self.rows == 0 { "\n" } else { ",\n" };
                w.write_all(sep.as_bytes())?;
                serde_json::to_writer(&mut *w, item)?;
            }
        }
        self.rows += 1;
        Ok(())
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        match self.format {
            Format::Csv => self.csv.as_mut().unwrap().flush(),
            Format::Json => self.raw.as_mut().unwrap().flush(),
        }
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        if let Some(w) = self.raw.as_mut() {
            w.write_all(if self.rows == 0 { b"]\n" } else { b"\n]\n" })?;
        }
        self.flush()
    }
}

/// Header line for the aggregate table in CSV form.
pub const AGGREGATE_HEADER: &str = "n,d,k,trials,successes,success_rate,mean_size,mean_wall_ms";

/// Runs every cell on a pool of `workers` threads. Rows keep `(n, d, trial)`
/// order and are flushed after each cell.
pub fn run<W: Write>(
    spec: &ExperimentSpec,
    workers: usize,
    timing: bool,
    table: &mut TableWriter<W>,
) -> std::io::Result<Vec<Row>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(std::io::Error::other)?;
    let mut all = Vec::new();
    for (n, d_index, d) in spec.cells() {
        let rows: Vec<Row> = pool.install(|| {
            (0..spec.trials)
                .into_par_iter()
                .map(|t| run_trial(spec, n, d_index, d, t, timing))
                .collect()
        });
        for r in &rows {
            table.write(r)?;
        }
        table.flush()?;
        all.extend(rows);
    }
    Ok(all)
}
