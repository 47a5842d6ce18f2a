//! The `transversal` command line.

pub mod experiment;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use transversal::engine::{expansion_check_with, ExpansionOptions, ExpansionSpec, ExpansionVerdict};
use transversal::generators::{Family, GenSpec};
use transversal::matching::{parse_matching, serialize_matching};
use transversal::oracle::{count_transversals, find_transversal_exact};
use transversal::rainbow::{
    augment_restarts, pipeline_graph, solve_auto, solve_pipeline, solve_pipeline_observed,
    PipelineParams, StageLog, AUTO_RESTARTS,
};
use transversal::{parse_latin, serialize_latin, to_graph, LatinArray, Side, Subpair};

use experiment::{ExperimentSpec, Format, TableWriter};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NONE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "transversal", version, about = "Transversals of Latin arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Cyclic,
    Z2k,
    Random,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated array.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        /// Split colours until there are this many.
        #[arg(long)]
        colours: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Jacobson–Matthews moves (default n³).
        #[arg(long)]
        mixing: Option<u64>,
    },
    /// Count transversals exactly.
    Count { file: PathBuf },
    /// Find a transversal.
    Solve {
        file: PathBuf,
        #[arg(long, conflicts_with_all = ["pipeline", "greedy"])]
        exact: bool,
        #[arg(long, conflicts_with = "greedy")]
        pipeline: bool,
        #[arg(long)]
        greedy: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// `verify FILE MATCHFILE` or `verify robust-pair FILE PAIRFILE`.
    Verify {
        #[arg(num_args = 2..=3, required = true)]
        args: Vec<String>,
    },
    /// Run the staged construction with a stage log.
    Pipeline {
        file: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stage log destination (default stderr).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a seeded sweep described by a TOML file.
    Experiment {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Leave wall_ms empty so that output is reproducible byte for byte.
        #[arg(long)]
        no_timing: bool,
        /// Aggregate table destination (default stderr).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

/// A pair to certify: parts, optional seed of the one-edge-per-colour graph
/// the pair lives in, optional degree bound.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub min_degree: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
}

type Outcome = Result<i32, Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_array(path: &Path) -> Result<LatinArray, Failure> {
    let array = parse_latin(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    to_graph(&array).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(array)
}

fn read_params(path: Option<&PathBuf>) -> Result<PipelineParams, Failure> {
    match path {
        Some(p) => PipelineParams::from_toml(&read(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => Ok(PipelineParams::default()),
    }
}

/// Parses `args` (without the program name), runs the command and returns
/// the exit code: 0 found or verified, 1 none found or not verified,
/// 2 invalid input, 3 internal error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("transversal")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = panic::catch_unwind(AssertUnwindSafe(|| dispatch(cli.command, out, err)));
    match result {
        Ok(Ok(code)) => code,
        Ok(Err(Failure::Input(msg))) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
        Err(_) => {
            let _ = writeln!(err, "error: internal assertion failed");
            EXIT_INTERNAL
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Gen {
            family,
            n,
            colours,
            seed,
            mixing,
        } => {
            let family = match (family, colours) {
                (FamilyArg::Cyclic, _) => Family::Cyclic,
                (FamilyArg::Z2k, _) => Family::Z2k,
                (FamilyArg::Random, None) => Family::RandomLatin,
                (FamilyArg::Random, Some(_)) => Family::Split,
            };
            let spec = GenSpec {
                n,
                target_colours: colours,
                family,
                seed,
                mixing_steps: mixing,
            };
            let array = spec.generate().map_err(input)?;
            out.write_all(serialize_latin(&array).as_bytes()).map_err(input)?;
            Ok(EXIT_OK)
        }
        Command::Count { file } => {
            let array = read_array(&file)?;
            let count = count_transversals(&array);
            writeln!(out, "{count}").map_err(input)?;
            Ok(if count > 0 { EXIT_OK } else { EXIT_NONE })
        }
        Command::Solve {
            file,
            exact,
            pipeline,
            greedy,
            seed,
            params,
        } => {
            let array = read_array(&file)?;
            let params = read_params(params.as_ref())?;
            let graph = transversal::ColouredBipartiteGraph::from_latin(&array);
            let (found, none) = if exact {
                (find_transversal_exact(&array), "none (exact)".to_string())
            } else if pipeline {
                match solve_pipeline(&array, &params, seed).result {
                    Ok(m) => (Some(m), String::new()),
                    Err(f) => (None, format!("none found (pipeline failed at {f})")),
                }
            } else if greedy {
                (augment_restarts(&array, seed, AUTO_RESTARTS), "none found (greedy)".into())
            } else {
                let auto = solve_auto(&array, seed);
                let none = if auto.authoritative { "none (exact)" } else { "none found" };
                (auto.matching, none.to_string())
            };
            match found {
                Some(m) => {
                    assert!(transversal::verify_rainbow_perfect(&graph, &m), "solver returned an unverified matching");
                    out.write_all(serialize_matching(&m, true).as_bytes()).map_err(input)?;
                    Ok(EXIT_OK)
                }
                None => {
                    writeln!(out, "{none}").map_err(input)?;
                    Ok(EXIT_NONE)
                }
            }
        }
        Command::Verify { args } => verify(&args, out),
        Command::Pipeline {
            file,
            params,
            seed,
            log,
        } => {
            let array = read_array(&file)?;
            let params = read_params(params.as_ref())?;
            let mut stages = StageLog::default();
            let outcome = solve_pipeline_observed(&array, &params, seed, &mut stages);
            let mut text = String::new();
            for r in &stages.0 {
                text.push_str(&format!("{r}\n"));
            }
            match &outcome.result {
                Ok(_) => text.push_str("result success\n"),
                Err(f) => text.push_str(&format!("result failure {f}\n")),
            }
            match log {
                Some(path) => fs::write(&path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
                None => err.write_all(text.as_bytes()).map_err(input)?,
            }
            match outcome.result {
                Ok(m) => {
                    out.write_all(serialize_matching(&m, true).as_bytes()).map_err(input)?;
                    Ok(EXIT_OK)
                }
                Err(f) => {
                    writeln!(out, "none found (pipeline failed at {f})").map_err(input)?;
                    Ok(EXIT_NONE)
                }
            }
        }
        Command::Experiment {
            spec,
            out: path,
            format,
            workers,
            no_timing,
            summary,
        } => {
            let text = read(&spec)?;
            let spec = ExperimentSpec::from_toml(&text).map_err(input)?;
            let format = format.or(spec.format).unwrap_or(Format::Csv);
            let path = path.or_else(|| spec.output_path.clone().map(PathBuf::from));
            let rows = match &path {
                Some(p) => {
                    let file = fs::File::create(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
                    let mut table = TableWriter::new(format, io::BufWriter::new(file)).map_err(input)?;
                    let rows = experiment::run(&spec, workers, !no_timing, &mut table).map_err(input)?;
                    table.finish().map_err(input)?;
                    rows
                }
                None => {
                    let mut table = TableWriter::new(format, &mut *out).map_err(input)?;
                    let rows = experiment::run(&spec, workers, !no_timing, &mut table).map_err(input)?;
                    table.finish().map_err(input)?;
                    rows
                }
            };
            let aggregates = experiment::aggregate(&rows);
            let mut buf = Vec::new();
            {
                let mut table = aggregate_writer(format, &mut buf).map_err(input)?;
                for a in &aggregates {
                    table.write(a).map_err(input)?;
                }
                table.finish().map_err(input)?;
            }
            match summary {
                Some(p) => fs::write(&p, buf).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
                None => err.write_all(&buf).map_err(input)?,
            }
            Ok(EXIT_OK)
        }
    }
}

fn aggregate_writer<W: Write>(format: Format, w: W) -> io::Result<TableWriter<W>> {
    match format {
        Format::Csv => TableWriter::with_header(w, experiment::AGGREGATE_HEADER),
        Format::Json => TableWriter::new(Format::Json, w),
    }
}

fn verify(args: &[String], out: &mut dyn Write) -> Outcome {
    if args[0] == "robust-pair" {
        if args.len() != 3 {
            return Err(Failure::Input("usage: verify robust-pair FILE PAIRFILE".into()));
        }
        return verify_pair(Path::new(&args[1]), Path::new(&args[2]), out);
    }
    if args.len() != 2 {
        return Err(Failure::Input("usage: verify FILE MATCHFILE".into()));
    }
    let array = read_array(Path::new(&args[0]))?;
    let m = parse_matching(&read(Path::new(&args[1]))?).map_err(input)?;
    let graph = transversal::ColouredBipartiteGraph::from_latin(&array);
    match m.verify_perfect(&graph) {
        Ok(()) => {
            writeln!(out, "RAINBOW-PERFECT: yes").map_err(input)?;
            Ok(EXIT_OK)
        }
        Err(defect) => {
            writeln!(out, "RAINBOW-PERFECT: no ({defect})").map_err(input)?;
            Ok(EXIT_NONE)
        }
    }
}

#[derive(Serialize)]
struct PairReport {
    holds: bool,
    balanced: bool,
    min_degree: usize,
    required_degree: usize,
    expansion_a: String,
    expansion_b: String,
    exact: bool,
}

fn describe(v: &ExpansionVerdict) -> String {
    match v {
        ExpansionVerdict::Holds { exact: true } => "holds".into(),
        ExpansionVerdict::Holds { exact: false } => "holds (local search)".into(),
        ExpansionVerdict::Violator {
            set,
            neighbours,
            required,
        } => format!("violated by {set:?}: {neighbours} neighbours, need {required}"),
    }
}

fn verify_pair(file: &Path, pair_file: &Path, out: &mut dyn Write) -> Outcome {
    let array = read_array(file)?;
    let pair: PairFile = serde_json::from_str(&read(pair_file)?).map_err(|e| Failure::Input(format!("{}: {e}", pair_file.display())))?;
    let n = array.order();
    let subpair = Subpair::new(pair.a.clone(), pair.b.clone());
    subpair.check_range(n, n).map_err(input)?;
    if subpair.len_a() == 0 || subpair.len_b() == 0 {
        return Err(Failure::Input("pair parts must be non-empty".into()));
    }
    let graph = match pair.seed {
        Some(s) => pipeline_graph(&array, s),
        None => transversal::ColouredBipartiteGraph::from_latin(&array),
    };
    let g1 = graph.induced(&subpair);
    let spec = ExpansionSpec::for_part(subpair.len_a());
    let options = ExpansionOptions::default();
    let ea = expansion_check_with(&g1, Side::A, spec, &options);
    let eb = expansion_check_with(&g1, Side::B, spec, &options);
    let required = pair.min_degree.unwrap_or(1);
    let min_degree = g1.min_degree();
    let balanced = subpair.is_balanced();
    let exact = ![&ea, &eb].iter().any(|v| matches!(v, ExpansionVerdict::Holds { exact: false }));
    let report = PairReport {
        holds: balanced && min_degree >= required && ea.holds() && eb.holds(),
        balanced,
        min_degree,
        required_degree: required,
        expansion_a: describe(&ea),
        expansion_b: describe(&eb),
        exact,
    };
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes")).map_err(input)?;
    Ok(if report.holds { EXIT_OK } else { EXIT_NONE })
}

