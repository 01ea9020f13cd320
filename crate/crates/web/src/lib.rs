//! Browser bindings for three interactive views: coherence distillation
//! curves, the free component of a depolarized T gate, and the noisy T-count
//! lower bound for a CCZ gate. Each export has a plain Rust twin that the
//! native tests exercise.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use freecomp::bounds::{self, BoundValue};
use freecomp::figures;

#[derive(Debug, Serialize, PartialEq)]
pub struct Curve {
    pub x: Vec<f64>,
    pub optimal_error: Vec<f64>,
    pub gamma_bound: Vec<f64>,
    pub lmin_bound: Vec<f64>,
}

/// Coherence distillation curve for `depolarized` or `amp-damped` |+⟩ at
/// the midpoints of `points` equal cells of (0, 1). The endpoints are pure
/// states, where the min-eigenvalue baseline does not apply.
pub fn coherence_curve_native(family: &str, points: usize) -> Result<Curve, String> {
    if !(2..=400).contains(&points) {
        return Err(format!("points = {points} must lie in [2, 400]"));
    }
    let row = match family {
        "depolarized" => figures::depolarized_plus_row,
        "amp-damped" => figures::amp_damped_plus_row,
        other => return Err(format!("unknown family {other:?}")),
    };
    let mut c = Curve { x: Vec::new(), optimal_error: Vec::new(), gamma_bound: Vec::new(), lmin_bound: Vec::new() };
    for k in 0..points {
        let x = (k as f64 + 0.5) / points as f64;
        let r = row(x).map_err(|e| e.to_string())?;
        c.x.push(x);
        c.optimal_error.push(r.sdp_optimal_error);
        c.gamma_bound.push(r.gamma_bound);
        c.lmin_bound.push(r.lmin_bound);
    }
    Ok(c)
}

/// Γ of `depolarizing(μ)∘T` over the Clifford hull.
pub fn noisy_t_gamma_native(mu: f64) -> Result<f64, String> {
    figures::noisy_t_gamma(mu).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize, PartialEq)]
pub struct TCount {
    pub gamma: f64,
    /// Real-valued lower bound; `None` when it diverges.
    pub count: Option<f64>,
    pub count_ceil: Option<u64>,
}

/// Lower bound on the number of `depolarizing(μ)∘T` gates needed for a CCZ
/// within diamond error `eps`.
pub fn t_count_native(mu: f64, eps: f64) -> Result<TCount, String> {
    let gamma = noisy_t_gamma_native(mu)?;
    let v = bounds::noisy_ccz_count(gamma, eps).map_err(|e| e.to_string())?;
    let count = match v {
        BoundValue::Finite(x) => Some(x),
        _ => None,
    };
    let count_ceil = count.map(|x| (x - 1e-9 * x.max(1.0)).ceil().max(0.0) as u64);
    Ok(TCount { gamma, count, count_ceil })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.map(|v| serde_json::to_string(&v).expect("plain data serializes")).map_err(|e| JsValue::from_str(&e))
}

/// JSON `{x, optimal_error, gamma_bound, lmin_bound}`.
#[wasm_bindgen]
pub fn coherence_curve(family: &str, points: usize) -> Result<String, JsValue> {
    to_js(coherence_curve_native(family, points))
}

#[wasm_bindgen]
pub fn noisy_t_gamma(mu: f64) -> Result<f64, JsValue> {
    noisy_t_gamma_native(mu).map_err(|e| JsValue::from_str(&e))
}

/// JSON `{gamma, count, count_ceil}`; counts are `null` when divergent.
#[wasm_bindgen]
pub fn t_count(mu: f64, eps: f64) -> Result<String, JsValue> {
    to_js(t_count_native(mu, eps))
}
