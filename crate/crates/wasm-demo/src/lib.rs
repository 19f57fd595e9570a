//! Browser bindings for three operations of the `supernorm` library. Inputs and
//! outputs are JSON strings; the `*_json` functions hold the logic and run on
//! any target, the exported wrappers only convert errors to JS values.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use supernorm::certify::{check_four_point, check_gradient_monotone};
use supernorm::online::{brute_opt_loadbalance, greedy_bound, greedy_loadbalance, LoadBalanceInstance};
use supernorm::NormDescriptor;

/// Caps the sample count so a click never freezes the page.
const MAX_SAMPLES: usize = 20_000;

fn parse_vector(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("not a number: {s:?}")))
        .collect()
}

fn parse_norm(norm_json: &str) -> Result<NormDescriptor, String> {
    NormDescriptor::from_json_str(norm_json).map_err(|e| e.to_string())
}

/// Value and gradient of a norm at a comma-separated point.
pub fn evaluate_json(norm_json: &str, point: &str) -> Result<String, String> {
    let norm = parse_norm(norm_json)?;
    let x = parse_vector(point)?;
    let value = norm.eval_slice(&x).map_err(|e| e.to_string())?;
    let gradient = norm.gradient(&x, 1e-6).ok();
    Ok(json!({
        "kind": norm.kind_name(),
        "dim": norm.dim(),
        "value": value,
        "gradient": gradient,
        "declared_p": norm.supermod_p(),
    })
    .to_string())
}

/// Four-point and gradient-monotone checks at exponent `p`.
pub fn certify_json(norm_json: &str, p: f64, samples: usize, seed: u64) -> Result<String, String> {
    let norm = parse_norm(norm_json)?;
    let samples = samples.clamp(1, MAX_SAMPLES);
    let fp = check_four_point(&norm, p, samples, seed).map_err(|e| e.to_string())?;
    let gm = check_gradient_monotone(&norm, p, samples, seed).map_err(|e| e.to_string())?;
    let lines = vec![fp.summary(), gm.summary()];
    Ok(json!({ "passed": fp.passed && gm.passed, "lines": lines, "reports": [fp, gm] }).to_string())
}

/// Greedy assignment of jobs (rows of `sizes_json`) under ℓ_p, against the exact optimum.
pub fn loadbalance_json(sizes_json: &str, p: f64) -> Result<String, String> {
    let sizes: Vec<Vec<f64>> = serde_json::from_str(sizes_json).map_err(|e| e.to_string())?;
    let n = sizes.first().map_or(0, Vec::len);
    let objective = NormDescriptor::lp(n, p).map_err(|e| e.to_string())?;
    let inst = LoadBalanceInstance::new(sizes, objective).map_err(|e| e.to_string())?;
    let trace = greedy_loadbalance(&inst);
    let machines: Vec<usize> = supernorm::online::assignment_of(&trace);
    let opt = brute_opt_loadbalance(&inst).ok();
    let greedy = trace.final_objective;
    let loads: Vec<Value> = trace.steps.iter().map(|s| json!(s.objective_value)).collect();
    Ok(json!({
        "assignment": machines,
        "objective_after_step": loads,
        "greedy": greedy,
        "opt": opt,
        "ratio": opt.map(|o| if o > 0.0 { greedy / o } else { 1.0 }),
        "bound": greedy_bound(p),
    })
    .to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn evaluate(norm_json: &str, point: &str) -> Result<String, JsValue> {
    js(evaluate_json(norm_json, point))
}

#[wasm_bindgen]
pub fn certify(norm_json: &str, p: f64, samples: usize, seed: u32) -> Result<String, JsValue> {
    js(certify_json(norm_json, p, samples, seed as u64))
}

#[wasm_bindgen]
pub fn loadbalance(sizes_json: &str, p: f64) -> Result<String, JsValue> {
    js(loadbalance_json(sizes_json, p))
}
