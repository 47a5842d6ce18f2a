//! WebAssembly bindings for the demo page in `www/`. Every export takes and
//! returns plain strings; results are JSON objects, errors are
//! `{"error": "..."}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use transversal::generators::{Family, GenSpec};
use transversal::oracle::count_transversals;
use transversal::rainbow::{solve_auto, Method};
use transversal::{parse_latin, serialize_latin, to_graph, verify_rainbow_perfect, LatinArray};

/// Largest order the page generates.
pub const MAX_ORDER: usize = 96;
/// Largest order counted exactly.
pub const MAX_COUNT_ORDER: usize = 10;

fn error(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn rows(array: &LatinArray) -> Value {
    json!(array.rows().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn read(text: &str) -> Result<LatinArray, String> {
    let array = parse_latin(text).map_err(|e| e.to_string())?;
    to_graph(&array).map_err(|e| e.to_string())?;
    Ok(array)
}

/// `family` is `cyclic`, `z2k` or `random`; `colours` of 0 keeps `n`.
#[wasm_bindgen]
pub fn generate(family: &str, n: u32, colours: u32, seed: u32) -> String {
    let n = n as usize;
    if n == 0 || n > MAX_ORDER {
        return error(format!("order must lie in 1..={MAX_ORDER}"));
    }
    let target = (colours as usize > n).then_some(colours as usize);
    let family = match (family, target) {
        ("cyclic", None) => Family::Cyclic,
        ("z2k", None) => Family::Z2k,
        ("random", None) => Family::RandomLatin,
        ("random", Some(_)) => Family::Split,
        ("cyclic" | "z2k", Some(_)) => return error("extra colours need the random family"),
        _ => return error(format!("unknown family {family:?}")),
    };
    let spec = GenSpec {
        n,
        target_colours: target,
        family,
        seed: seed as u64,
        mixing_steps: None,
    };
    match spec.generate() {
        Ok(a) => json!({
            "n": a.order(),
            "k": a.colour_count(),
            "rows": rows(&a),
            "text": serialize_latin(&a),
        })
        .to_string(),
        Err(e) => error(e),
    }
}

/// Looks for a transversal of the array in `text`.
#[wasm_bindgen]
pub fn solve(text: &str, seed: u32) -> String {
    let array = match read(text) {
        Ok(a) => a,
        Err(e) => return error(e),
    };
    let out = solve_auto(&array, seed as u64);
    let method = match out.method {
        Method::Exact => "exact",
        Method::Pipeline => "pipeline",
        Method::Augmenting => "augmenting",
    };
    let cells: Vec<Value> = out
        .matching
        .iter()
        .flat_map(|m| m.clone().sorted().into_edges())
        .map(|e| json!({ "row": e.a(), "col": e.b(), "colour": e.colour }))
        .collect();
    let verified = out
        .matching
        .as_ref()
        .is_some_and(|m| verify_rainbow_perfect(&transversal::ColouredBipartiteGraph::from_latin(&array), m));
    json!({
        "found": out.matching.is_some(),
        "verified": verified,
        "method": method,
        "authoritative": out.authoritative,
        "cells": cells,
    })
    .to_string()
}

/// Counts transversals exactly for small orders.
#[wasm_bindgen]
pub fn count(text: &str) -> String {
    match read(text) {
        Ok(a) if a.order() > MAX_COUNT_ORDER => error(format!("counting is limited to n <= {MAX_COUNT_ORDER}")),
        Ok(a) => json!({ "n": a.order(), "count": count_transversals(&a) }).to_string(),
        Err(e) => error(e),
    }
}
