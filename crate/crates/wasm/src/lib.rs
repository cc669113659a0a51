//! Browser bindings for exploring the smoothed 1-D benchmark `|x|^3 - |x|`:
//! sample the original and smoothed landscapes, run either solver and get
//! the iterate path, and query the admissibility constants for a parameter
//! choice. All payloads are JSON strings so the page needs no glue types.

use nalgebra::DVector;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use dc_moreau::convex;
use dc_moreau::metric::SmoothingParams;
use dc_moreau::smoothing::SmoothedObjective;
use dc_moreau::solver::{
    admissible_gamma_range, run_gd, run_inertial, theta_bound, Algo, SolverConfig,
};

fn shared_bound(d1: f64, d2: f64) -> f64 {
    [d1, 1.0 / d1, d2, 1.0 / d2, 1.0]
        .into_iter()
        .fold(1.0, f64::max)
}

fn objective(lambda: f64, mu: f64, d1: f64, d2: f64) -> Result<SmoothedObjective, String> {
    let m = shared_bound(d1, d2);
    let params = SmoothingParams::scalar(lambda, mu, d1, d2, m).map_err(|e| e.to_string())?;
    SmoothedObjective::new(convex::abs_cubed_minus_abs(), params).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Landscape {
    xs: Vec<f64>,
    phi: Vec<f64>,
    phi_smooth: Vec<f64>,
    sandwich_lower: Option<Vec<f64>>,
    sandwich_upper: Option<Vec<f64>>,
}

pub fn landscape_impl(
    lambda: f64,
    mu: f64,
    d1: f64,
    d2: f64,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<String, String> {
    if hi.is_nan() || lo.is_nan() || hi <= lo || samples < 2 {
        return Err("need hi > lo and at least 2 samples".into());
    }
    let obj = objective(lambda, mu, d1, d2)?;
    let admissible = obj.params().sandwich_admissible();
    let n = samples;
    let mut out = Landscape {
        xs: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
        phi_smooth: Vec::with_capacity(n),
        sandwich_lower: admissible.then(|| Vec::with_capacity(n)),
        sandwich_upper: admissible.then(|| Vec::with_capacity(n)),
    };
    for k in 0..n {
        let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let p = DVector::from_element(1, x);
        out.xs.push(x);
        out.phi
            .push(obj.problem().value(&p).map_err(|e| e.to_string())?);
        out.phi_smooth
            .push(obj.value(&p).map_err(|e| e.to_string())?);
        if admissible {
            let (lower, upper) = obj.sandwich_bounds(&p).map_err(|e| e.to_string())?;
            out.sandwich_lower.as_mut().unwrap().push(lower);
            out.sandwich_upper.as_mut().unwrap().push(upper);
        }
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SolveOutcome {
    status: String,
    iterations: usize,
    final_x: f64,
    final_phi: f64,
    final_phi_smooth: f64,
    monitors_ok: bool,
    trace_x: Vec<f64>,
    trace_phi_smooth: Vec<f64>,
    trace_step_norm: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn solve_impl(
    algo: &str,
    lambda: f64,
    mu: f64,
    d1: f64,
    d2: f64,
    gamma: f64,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<String, String> {
    let obj = objective(lambda, mu, d1, d2)?;
    let algo: Algo = algo.parse().map_err(|e: dc_moreau::Error| e.to_string())?;
    let mut cfg = match algo {
        Algo::Gd => SolverConfig::gd(gamma),
        Algo::Inertial => SolverConfig::inertial(gamma),
    };
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    // keep payloads small for long runs
    cfg.trace_thinning = (max_iter / 2000).max(1);
    let start = DVector::from_element(1, x0);
    let result = match algo {
        Algo::Gd => run_gd(&obj, &cfg, &start),
        Algo::Inertial => run_inertial(&obj, &cfg, &start, &start),
    }
    .map_err(|e| e.to_string())?;
    let outcome = SolveOutcome {
        status: result.status.as_str().to_string(),
        iterations: result.iterations,
        final_x: result.final_x[0],
        final_phi: obj
            .problem()
            .value(&result.final_x)
            .map_err(|e| e.to_string())?,
        final_phi_smooth: result.final_phi_smooth,
        monitors_ok: result.monitors.all_ok(),
        trace_x: result.trace.iter().map(|r| r.x[0]).collect(),
        trace_phi_smooth: result.trace.iter().map(|r| r.phi_smooth).collect(),
        trace_step_norm: result.trace.iter().map(|r| r.step_norm).collect(),
    };
    serde_json::to_string(&outcome).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Constants {
    m: f64,
    grad_lipschitz: f64,
    grad_quadform_bound: f64,
    gd_gamma_lo: f64,
    gd_gamma_hi: f64,
    inertial_gamma_lo: f64,
    inertial_gamma_hi: f64,
    theta_max: f64,
    sandwich_admissible: bool,
}

pub fn constants_impl(
    lambda: f64,
    mu: f64,
    d1: f64,
    d2: f64,
    gamma: f64,
) -> Result<String, String> {
    let obj = objective(lambda, mu, d1, d2)?;
    let gd = admissible_gamma_range(&obj, Algo::Gd);
    let inertial = admissible_gamma_range(&obj, Algo::Inertial);
    let out = Constants {
        m: obj.params().m(),
        grad_lipschitz: obj.grad_lipschitz(),
        grad_quadform_bound: obj.grad_quadform_bound(),
        gd_gamma_lo: gd.lo,
        gd_gamma_hi: gd.hi,
        inertial_gamma_lo: inertial.lo,
        inertial_gamma_hi: inertial.hi,
        theta_max: theta_bound(gamma, 0.99, obj.grad_lipschitz(), obj.grad_quadform_bound()),
        sandwich_admissible: obj.params().sandwich_admissible(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn landscape(
    lambda: f64,
    mu: f64,
    d1: f64,
    d2: f64,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<String, JsValue> {
    landscape_impl(lambda, mu, d1, d2, lo, hi, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn solve(
    algo: &str,
    lambda: f64,
    mu: f64,
    d1: f64,
    d2: f64,
    gamma: f64,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<String, JsValue> {
    solve_impl(algo, lambda, mu, d1, d2, gamma, x0, tol, max_iter)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn constants(lambda: f64, mu: f64, d1: f64, d2: f64, gamma: f64) -> Result<String, JsValue> {
    constants_impl(lambda, mu, d1, d2, gamma).map_err(|e| JsValue::from_str(&e))
}
