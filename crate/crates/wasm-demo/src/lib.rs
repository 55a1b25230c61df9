//! Browser bindings: limit-law curves, an event-system audit and a
//! max-degree simulation. Each call takes plain numbers or a JSON string
//! and returns JSON.

use exindep::coefficients::audit;
use exindep::experiments::{independent_cdf, run_max_experiment, ExperimentConfig, ExperimentKind, XGrid};
use exindep::gumbel::{gumbel_cdf, norm_constants, product_max_cdf, NormConstants};
use exindep::prob::SystemDocument;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Curves {
    x: Vec<f64>,
    product: Vec<f64>,
    gumbel: Vec<f64>,
    sup_distance: f64,
    constants: NormConstants,
}

#[derive(Serialize)]
struct Simulation {
    x: Vec<f64>,
    empirical: Vec<f64>,
    independent: Vec<f64>,
    gumbel: Vec<f64>,
    ks: f64,
    raw_max: Vec<f64>,
    constants: NormConstants,
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn grid(step: f64) -> Result<Vec<f64>, String> {
    let g = XGrid {
        step,
        ..XGrid::default()
    };
    g.validate().map_err(|e| e.to_string())?;
    Ok(g.points())
}

/// `P(max of d iid Bin(N, p) ≤ a + b x)` against the Gumbel law.
pub fn curves(d: u64, n_trials: u64, p: f64, step: f64) -> Result<String, String> {
    let c = norm_constants(d, n_trials, p).map_err(|e| e.to_string())?;
    let x = grid(step)?;
    let product = x
        .iter()
        .map(|&t| product_max_cdf(d as f64, n_trials, p, t, &c))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let gumbel: Vec<f64> = x.iter().map(|&t| gumbel_cdf(t)).collect();
    let sup_distance = product.iter().zip(&gumbel).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()));
    json(&Curves {
        x,
        product,
        gumbel,
        sup_distance,
        constants: c,
    })
}

/// Full bound audit of a `{"atoms": …, "events": …, "dep": …}` document.
pub fn audit_document(doc: &str) -> Result<String, String> {
    let (system, dep) = SystemDocument::from_json(doc)
        .and_then(|d| d.build())
        .map_err(|e| e.to_string())?;
    json(&audit(&system, &dep).map_err(|e| e.to_string())?)
}

/// Maximum degree of `G(n, p)` over `trials` graphs.
pub fn max_degree(n: usize, p: f64, trials: usize, seed: u64) -> Result<String, String> {
    let cfg = ExperimentConfig::new(ExperimentKind::GraphMaxdeg, n, p, trials, seed);
    let r = run_max_experiment(&cfg).map_err(|e| e.to_string())?;
    let x = cfg.grid.points();
    let mut sorted = r.normalized.clone();
    sorted.sort_by(f64::total_cmp);
    let empirical = exindep::experiments::empirical_cdf(&sorted, &x);
    let independent = x
        .iter()
        .map(|&t| independent_cdf(&cfg, r.constants.threshold(t)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    json(&Simulation {
        gumbel: x.iter().map(|&t| gumbel_cdf(t)).collect(),
        x,
        empirical,
        independent,
        ks: r.ks,
        raw_max: r.samples,
        constants: r.constants,
    })
}

#[wasm_bindgen]
pub fn limit_law_curves(d: f64, n_trials: f64, p: f64, step: f64) -> Result<String, JsError> {
    curves(d as u64, n_trials as u64, p, step).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn audit_event_system(doc: &str) -> Result<String, JsError> {
    audit_document(doc).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate_max_degree(n: usize, p: f64, trials: usize, seed: u32) -> Result<String, JsError> {
    max_degree(n, p, trials, seed.into()).map_err(|e| JsError::new(&e))
}
