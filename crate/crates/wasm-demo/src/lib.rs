//! Browser bindings for the M/E_r/c/K solver.
//!
//! Three operations back the demo page in `www/`: solving one instance,
//! sampling the Erlang service density, and sweeping mean system size over
//! a range of traffic densities. Each has a plain Rust counterpart so it can
//! be tested natively.

use erlang_queue::{erlang_pdf, solve, Method, QueueParams, SolverConfig};
use wasm_bindgen::prelude::*;

/// Largest state space the page will solve; dense solves beyond this stall
/// the browser tab.
pub const MAX_STATES: u64 = 2500;

/// Result of solving one instance, exposed to JavaScript through getters.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Solved {
    p_n: Vec<f64>,
    n_states: usize,
    l: f64,
    lq: f64,
    w: f64,
    wq: f64,
    p_block: f64,
    residual: f64,
}

#[wasm_bindgen]
impl Solved {
    /// Probability of `n` customers in the system, for `n = 0..=c+K`.
    #[wasm_bindgen(getter)]
    pub fn p_n(&self) -> Vec<f64> {
        self.p_n.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn n_states(&self) -> usize {
        self.n_states
    }
    #[wasm_bindgen(getter)]
    pub fn l(&self) -> f64 {
        self.l
    }
    #[wasm_bindgen(getter)]
    pub fn lq(&self) -> f64 {
        self.lq
    }
    #[wasm_bindgen(getter)]
    pub fn w(&self) -> f64 {
        self.w
    }
    #[wasm_bindgen(getter)]
    pub fn wq(&self) -> f64 {
        self.wq
    }
    #[wasm_bindgen(getter)]
    pub fn p_block(&self) -> f64 {
        self.p_block
    }
    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

fn checked_params(r: usize, c: usize, k: usize, rho: f64, mu: f64) -> Result<QueueParams, String> {
    let params = QueueParams::from_rho(rho, c, r, mu, k).map_err(|e| e.to_string())?;
    let n = erlang_queue::state_count(r, c, k).map_err(|e| e.to_string())?;
    if n > MAX_STATES {
        return Err(format!("{n} states exceeds the demo limit of {MAX_STATES}"));
    }
    Ok(params)
}

pub fn solve_instance(
    r: usize,
    c: usize,
    k: usize,
    rho: f64,
    method: &str,
) -> Result<Solved, String> {
    let method: Method = method
        .parse()
        .map_err(|e: erlang_queue::Error| e.to_string())?;
    let params = checked_params(r, c, k, rho, 1.0)?;
    let sol = solve(&params, method, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let m = sol.measures;
    Ok(Solved {
        p_n: sol.distribution.p,
        n_states: sol.space.len(),
        l: m.l,
        lq: m.lq,
        w: m.w,
        wq: m.wq,
        p_block: m.p_block,
        residual: sol.stationary.residual,
    })
}

/// Erlang(r) density with unit mean sampled at `points` evenly spaced
/// times in `[0, t_max]`.
pub fn service_density(r: usize, t_max: f64, points: usize) -> Result<Vec<f64>, String> {
    if r == 0 || points < 2 || !(t_max.is_finite() && t_max > 0.0) {
        return Err("need r >= 1, points >= 2 and a positive t_max".into());
    }
    let mu = r as f64;
    let step = t_max / (points - 1) as f64;
    Ok((0..points)
        .map(|i| erlang_pdf(i as f64 * step, r, mu))
        .collect())
}

/// Mean number in system at `points` evenly spaced densities in
/// `[rho_min, rho_max]`, solved with the linear method.
pub fn mean_size_curve(
    r: usize,
    c: usize,
    k: usize,
    rho_min: f64,
    rho_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if points < 2 || !(rho_min > 0.0 && rho_max > rho_min) {
        return Err("need points >= 2 and 0 < rho_min < rho_max".into());
    }
    let step = (rho_max - rho_min) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let params = checked_params(r, c, k, rho_min + i as f64 * step, 1.0)?;
            solve(&params, Method::Linear, &SolverConfig::default())
                .map(|s| s.measures.l)
                .map_err(|e| e.to_string())
        })
        .collect()
}

#[wasm_bindgen(js_name = solve)]
pub fn solve_js(r: usize, c: usize, k: usize, rho: f64, method: &str) -> Result<Solved, JsError> {
    solve_instance(r, c, k, rho, method).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = serviceDensity)]
pub fn service_density_js(r: usize, t_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    service_density(r, t_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = meanSizeCurve)]
pub fn mean_size_curve_js(
    r: usize,
    c: usize,
    k: usize,
    rho_min: f64,
    rho_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    mean_size_curve(r, c, k, rho_min, rho_max, points).map_err(|e| JsError::new(&e))
}
