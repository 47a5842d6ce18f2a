use serde_json::Value;
use transversal_web::{count, generate, solve};

fn parse(s: &str) -> Value {
    serde_json::from_str(s).expect("exports return JSON")
}

#[test]
fn generate_then_solve() {
    let g = parse(&generate("random", 24, 300, 7));
    assert_eq!((g["n"].as_u64(), g["k"].as_u64()), (Some(24), Some(300)));
    assert_eq!(g["rows"].as_array().unwrap().len(), 24);

    let s = parse(&solve(g["text"].as_str().unwrap(), 1));
    assert_eq!(s["found"], true);
    assert_eq!(s["verified"], true);
    let cells = s["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 24);
    let rows = g["rows"].as_array().unwrap();
    for c in cells {
        let (r, col) = (c["row"].as_u64().unwrap() as usize, c["col"].as_u64().unwrap() as usize);
        assert_eq!(rows[r][col], c["colour"]);
    }
}

#[test]
fn counts_and_no_transversal() {
    let c5 = parse(&generate("cyclic", 5, 0, 0));
    assert_eq!(parse(&count(c5["text"].as_str().unwrap()))["count"], 15);

    let z = parse(&generate("z2k", 6, 0, 0));
    let text = z["text"].as_str().unwrap();
    assert_eq!(parse(&count(text))["count"], 0);
    let s = parse(&solve(text, 0));
    assert_eq!((s["found"].as_bool(), s["authoritative"].as_bool()), (Some(false), Some(true)));
    assert_eq!(s["method"], "exact");
}

#[test]
fn errors_are_json() {
    for out in [
        generate("z2k", 5, 0, 0),
        generate("hexagonal", 4, 0, 0),
        generate("cyclic", 4, 10, 0),
        generate("random", 0, 0, 0),
        solve("2 2\n0 0\n1 1\n", 0),
        count("not an array"),
        count(parse(&generate("cyclic", 12, 0, 0))["text"].as_str().unwrap()),
    ] {
        assert!(parse(&out)["error"].is_string(), "{out}");
    }
}
