//! Browser bindings. Each export returns a JSON string; errors become a
//! thrown `Error` on the JS side.

use std::sync::Arc;

use powerweight::operator::apply_operator;
use powerweight::sweep::{run_boundedness_sweep, SweepPlan};
use powerweight::{check_boundedness, BoundednessQuery, FunctionSpec, Grid, KernelSpec, SampledFunction, Theorem};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_SAMPLES: usize = 2000;

fn to_js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

fn query(thm: u8, s1: f64, s2: f64, p1: f64, p2: f64, kappa: f64) -> Result<BoundednessQuery, String> {
    let theorem = Theorem::from_number(thm).map_err(|e| e.to_string())?;
    let (p1, p2) = if theorem == Theorem::Thm1 { (2.0, 2.0) } else { (p1, p2) };
    let q = BoundednessQuery { theorem, s1, s2, p1, p2, kappa };
    q.validate().map_err(|e| e.to_string())?;
    Ok(q)
}

pub fn check_json(thm: u8, s1: f64, s2: f64, p1: f64, p2: f64, kappa: f64) -> Result<String, String> {
    let q = query(thm, s1, s2, p1, p2, kappa)?;
    let report = check_boundedness(&q).map_err(|e| e.to_string())?;
    let mut v = serde_json::to_value(&report).map_err(|e| e.to_string())?;
    v["query_text"] = json!(q.to_string());
    Ok(v.to_string())
}

/// Truncated operator norms over the radius schedule `10, 40, ...` up to
/// `r_max`, with the fitted growth exponent.
pub fn sweep_json(thm: u8, s1: f64, s2: f64, p1: f64, p2: f64, kappa: f64, r_max: f64) -> Result<String, String> {
    let q = query(thm, s1, s2, p1, p2, kappa)?;
    let mut plan = SweepPlan::new(vec![q], KernelSpec::envelope(kappa));
    plan.r_schedule = std::iter::successors(Some(10.0), |r| Some(r * 4.0)).take_while(|r| *r <= r_max).collect();
    if plan.r_schedule.is_empty() {
        return Err(format!("r_max must be at least 10, got {r_max}"));
    }
    let result = run_boundedness_sweep(&plan).map_err(|e| e.to_string())?;
    let qs = &result.queries[0];
    Ok(json!({
        "query": q.to_string(),
        "margin": qs.report.margin,
        "satisfied": qs.report.satisfied,
        "radii": qs.cells.iter().map(|c| c.radius).collect::<Vec<_>>(),
        "norms": qs.cells.iter().map(|c| c.norm).collect::<Vec<_>>(),
        "certified": qs.cells.iter().all(|c| c.certified),
        "gamma": qs.gamma,
        "verdict": qs.verdict.as_str(),
    })
    .to_string())
}

/// `f` and `Kf` sampled at `samples` points of `[-x_max, x_max]`.
pub fn apply_json(kernel: &str, function: &str, x_max: f64, samples: usize) -> Result<String, String> {
    let k: KernelSpec = kernel.parse().map_err(|e: powerweight::LabError| e.to_string())?;
    let spec: FunctionSpec = function.parse().map_err(|e: powerweight::LabError| e.to_string())?;
    if !(x_max.is_finite() && x_max > 0.0) || !(2..=MAX_SAMPLES).contains(&samples) {
        return Err(format!("need x_max > 0 and 2..={MAX_SAMPLES} samples"));
    }
    let radius = (4.0 * x_max).max(100.0);
    let grid = Grid::build(radius, 24, 1.3, 8).map_err(|e| e.to_string())?;
    let f = SampledFunction::from_spec(Arc::new(grid), spec).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = (0..samples).map(|i| -x_max + 2.0 * x_max * i as f64 / (samples - 1) as f64).collect();
    let kf = xs.iter().map(|&x| apply_operator(&k, &f, x)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    Ok(json!({
        "kernel": k.to_string(),
        "function": spec.to_string(),
        "x": xs,
        "f": xs.iter().map(|&x| spec.eval(x)).collect::<Vec<_>>(),
        "kf": kf,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn check(thm: u8, s1: f64, s2: f64, p1: f64, p2: f64, kappa: f64) -> Result<String, JsError> {
    to_js(check_json(thm, s1, s2, p1, p2, kappa))
}

#[wasm_bindgen]
pub fn sweep_curve(thm: u8, s1: f64, s2: f64, p1: f64, p2: f64, kappa: f64, r_max: f64) -> Result<String, JsError> {
    to_js(sweep_json(thm, s1, s2, p1, p2, kappa, r_max))
}

#[wasm_bindgen]
pub fn apply_curve(kernel: &str, function: &str, x_max: f64, samples: usize) -> Result<String, JsError> {
    to_js(apply_json(kernel, function, x_max, samples))
}
