use std::fs;
use std::path::Path;

use transversal::matching::parse_matching;
use transversal::{parse_latin, verify_rainbow_perfect, ColouredBipartiteGraph};
use transversal_cli::run;

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(args.iter().copied(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    let (code, out, _) = cli(&full);
    assert_eq!(code, 0);
    write(dir, name, &out)
}

#[test]
fn count_and_solve_cyclic() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "c7.txt", &["--family", "cyclic", "--n", "7"]);
    assert_eq!(cli(&["count", &a]), (0, "133\n".into(), String::new()));

    let (code, out, _) = cli(&["solve", &a, "--exact"]);
    assert_eq!(code, 0);
    let array = parse_latin(&fs::read_to_string(&a).unwrap()).unwrap();
    let m = parse_matching(&out).unwrap();
    assert!(verify_rainbow_perfect(&ColouredBipartiteGraph::from_latin(&array), &m));

    let mf = write(dir.path(), "m.txt", &out);
    let (code, out, _) = cli(&["verify", &a, &mf]);
    assert_eq!((code, out.trim()), (0, "RAINBOW-PERFECT: yes"));
}

#[test]
fn even_cyclic_tables_have_none() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "z.txt", &["--family", "z2k", "--n", "6"]);
    assert_eq!(cli(&["count", &a]).0, 1);
    let (code, out, _) = cli(&["solve", &a]);
    assert_eq!((code, out.trim()), (1, "none (exact)"));
}

#[test]
fn verify_rejects_a_repeated_colour() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "c3.txt", &["--family", "cyclic", "--n", "3"]);
    // The anti-diagonal of the cyclic square is one colour.
    let m = write(
        dir.path(),
        "m.txt",
        r#"[{"row":0,"col":2,"colour":2},{"row":1,"col":1,"colour":2},{"row":2,"col":0,"colour":2}]"#,
    );
    let (code, out, _) = cli(&["verify", &a, &m]);
    assert_eq!(code, 1);
    assert!(out.starts_with("RAINBOW-PERFECT: no"));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(cli(&["--help"]).0, 0);
    assert_eq!(cli(&["frobnicate"]).0, 2);
    assert_eq!(cli(&["count", "/nonexistent/file"]).0, 2);
    assert_eq!(cli(&["gen", "--family", "z2k", "--n", "5"]).0, 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "2 2\n0 0\n1 1\n");
    let (code, _, err) = cli(&["solve", &bad]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"));
}

#[test]
fn robust_pair_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "c5.txt", &["--family", "cyclic", "--n", "5"]);
    let whole = write(dir.path(), "p.json", r#"{"a":[0,1,2,3,4],"b":[0,1,2,3,4],"min_degree":5}"#);
    let (code, out, _) = cli(&["verify", "robust-pair", &a, &whole]);
    assert_eq!(code, 0, "{out}");

    let unbalanced = write(dir.path(), "u.json", r#"{"a":[0,1,2],"b":[0,1]}"#);
    assert_eq!(cli(&["verify", "robust-pair", &a, &unbalanced]).0, 1);

    let thin = write(dir.path(), "t.json", r#"{"a":[0,1,2,3,4],"b":[0,1,2,3,4],"seed":1,"min_degree":2}"#);
    assert_eq!(cli(&["verify", "robust-pair", &a, &thin]).0, 1);

    let outside = write(dir.path(), "o.json", r#"{"a":[0,9],"b":[0,1]}"#);
    assert_eq!(cli(&["verify", "robust-pair", &a, &outside]).0, 2);
}

#[test]
fn pipeline_log_names_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "r.txt", &["--family", "random", "--n", "48", "--colours", "2000", "--seed", "2"]);
    let log = dir.path().join("log.txt");
    let (code, out, err) = cli(&["pipeline", &a, "--seed", "4", "--log", log.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(err.is_empty());
    assert!(parse_matching(&out).is_ok());
    let text = fs::read_to_string(log).unwrap();
    for stage in ["input", "dense-subpair", "prune-to-robust", "reserve-colours", "augmenting-rainbow", "assemble"] {
        assert!(text.lines().any(|l| l.starts_with(stage)), "missing {stage}");
    }
    assert_eq!(text.lines().last(), Some("result success"));
}

#[test]
fn experiment_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "e.toml",
        "n_values = [6, 9]\ncolour_fractions = [1.0]\ntrials = 3\nsolver = \"exact\"\nmixing_steps = 500\n",
    );
    let rows = dir.path().join("rows.csv");
    let summary = dir.path().join("summary.csv");
    let (code, out, err) = cli(&[
        "experiment",
        &spec,
        "--out",
        rows.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty() && err.is_empty());

    let mut reader = csv::Reader::from_path(&rows).unwrap();
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 6);
    assert!(records.iter().all(|r| &r[5] == "true" && !r[8].is_empty()));

    let text = fs::read_to_string(summary).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("6,1.0,36,3,3,1.0,6.0,"));
}

#[test]
fn experiment_rejects_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    let few = write(dir.path(), "a.toml", "n_values = [10]\ncolour_fractions = [0.05]\ntrials = 1\n");
    assert_eq!(cli(&["experiment", &few]).0, 2);
    let unknown = write(dir.path(), "b.toml", "n_values = [10]\ncolour_fractions = [0.5]\ntrials = 1\ncolour = 3\n");
    assert_eq!(cli(&["experiment", &unknown]).0, 2);
}

#[test]
fn json_rows_match_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "e.toml", "n_values = [12]\ncolour_fractions = [0.5]\ntrials = 2\nmixing_steps = 800\n");
    let (_, csv_out, _) = cli(&["experiment", &spec, "--no-timing"]);
    let (_, json_out, _) = cli(&["experiment", &spec, "--no-timing", "--format", "json"]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&json_out).unwrap();
    let mut reader = csv::Reader::from_reader(csv_out.as_bytes());
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), records.len());
    for (j, r) in rows.iter().zip(&records) {
        assert_eq!(j["seed"].as_u64().unwrap().to_string(), r[3]);
        assert_eq!(j["success"].as_bool().unwrap().to_string(), r[5]);
        assert!(j["wall_ms"].is_null() && r[8].is_empty());
    }
}
