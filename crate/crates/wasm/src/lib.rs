//! Browser bindings. Each exported function takes plain numbers and returns
//! a JSON string; the `*_json` functions behind them are ordinary Rust and
//! are what the tests call.

use hgt_core::limit::{self, EngineOptions};
use hgt_core::outcome;
use hgt_core::ssa::{self, SimConfig};
use hgt_core::ModelParams;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Simulations in the page are capped so a click never hangs the tab.
pub const MAX_EVENTS: u64 = 20_000_000;

#[derive(Serialize)]
struct Curves {
    times: Vec<f64>,
    beta: Vec<Vec<f64>>,
    phase_times: Vec<f64>,
    dominant_indices: Vec<usize>,
    termination: limit::Termination,
    warnings: Vec<String>,
}

fn params(delta: f64, alpha: f64, tau: f64, c: f64) -> Result<ModelParams, String> {
    ModelParams::new(delta, alpha, tau, c).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn limit_json(delta: f64, alpha: f64, tau: f64, c: f64, t_max: f64, samples: usize) -> Result<String, String> {
    let p = params(delta, alpha, tau, c)?;
    let traj = limit::run(&p, t_max, &EngineOptions::default()).map_err(|e| e.to_string())?;
    let end = traj.end_time().min(t_max);
    let n = samples.max(2);
    // sample on a uniform grid plus every phase time so kinks are drawn exactly
    let mut times: Vec<f64> = (0..n).map(|i| (end * i as f64 / (n - 1) as f64).min(end)).collect();
    times.extend(traj.phase_times.iter().copied().filter(|&s| s <= end));
    times.sort_by(f64::total_cmp);
    times.dedup();
    let beta = traj.sample(&times).map_err(|e| e.to_string())?;
    to_json(&Curves {
        times,
        beta,
        phase_times: traj.phase_times.clone(),
        dominant_indices: traj.dominant_indices.clone(),
        termination: traj.termination,
        warnings: traj.warnings.iter().map(|w| w.to_string()).collect(),
    })
}

pub fn classify_json(delta: f64, alpha: f64, tau: f64) -> Result<String, String> {
    let p = params(delta, alpha, tau, 1.0)?;
    to_json(&outcome::classify(&p))
}

#[derive(Serialize)]
struct SimCurves {
    times: Vec<f64>,
    beta: Vec<Vec<f64>>,
    extinction: Option<f64>,
    events: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_json(
    delta: f64,
    alpha: f64,
    tau: f64,
    c: f64,
    k: u32,
    seed: u32,
    horizon: f64,
    grid_step: f64,
) -> Result<String, String> {
    let p = params(delta, alpha, tau, c)?;
    let mut cfg = SimConfig::new(p, k as u64, seed as u64, horizon, grid_step).map_err(|e| e.to_string())?;
    cfg.event_budget = MAX_EVENTS;
    let trace = match ssa::run(&cfg) {
        Ok(t) => t,
        Err(ssa::SimError::Budget { partial, .. }) => *partial,
        Err(e) => return Err(e.to_string()),
    };
    let n = trace.exponents_at.len();
    to_json(&SimCurves {
        times: trace.grid[..n].to_vec(),
        beta: trace.exponents_at,
        extinction: trace.extinction_logk,
        events: trace.events_executed,
    })
}

#[wasm_bindgen(js_name = limitTrajectory)]
pub fn limit_trajectory(delta: f64, alpha: f64, tau: f64, c: f64, t_max: f64, samples: usize) -> Result<String, JsValue> {
    limit_json(delta, alpha, tau, c, t_max, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn classify(delta: f64, alpha: f64, tau: f64) -> Result<String, JsValue> {
    classify_json(delta, alpha, tau).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    delta: f64,
    alpha: f64,
    tau: f64,
    c: f64,
    k: u32,
    seed: u32,
    horizon: f64,
    grid_step: f64,
) -> Result<String, JsValue> {
    simulate_json(delta, alpha, tau, c, k, seed, horizon, grid_step).map_err(|e| JsValue::from_str(&e))
}
