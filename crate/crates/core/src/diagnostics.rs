//! Independent oracles (grid prox, finite-difference gradients) and the named
//! validation suites that re-check every monitored inequality from scratch.
//!
//! Everything here is deterministic given `(seed, config)`: each property
//! draws from its own stream derived from the seed and the property name.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex::{self, ConvexFunction, DCProblem};
use crate::error::{Error, Result};
use crate::metric::{MetricMatrix, SmoothingParams};
use crate::prox::{prox, prox_lipschitz_check, ProxRequest};
use crate::smoothing::{metric_function, stationarity_report, SmoothedObjective};
use crate::solver::{self, run_gd, run_inertial, SolverConfig, ThetaPolicy, MONITOR_SLACK};

/// Grid and finite-difference settings for the oracles.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub grid_lo: DVector<f64>,
    pub grid_hi: DVector<f64>,
    pub grid_step: f64,
    pub fd_step: f64,
    pub seed: u64,
}

impl OracleConfig {
    pub fn new(dim: usize) -> Self {
        Self {
            grid_lo: DVector::from_element(dim, -3.0),
            grid_hi: DVector::from_element(dim, 3.0),
            // lattice scans are exponential in dim; trade resolution for
            // feasibility in 2-D (refinement recovers most of it)
            grid_step: if dim >= 2 { 1e-2 } else { 1e-3 },
            fd_step: 1e-6,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.grid_lo.len() != self.grid_hi.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid_lo.len(),
                got: self.grid_hi.len(),
            });
        }
        if self
            .grid_lo
            .iter()
            .zip(self.grid_hi.iter())
            .any(|(l, h)| l >= h)
        {
            return Err(Error::InvalidParameter {
                name: "grid",
                value: f64::NAN,
                constraint: "grid_lo < grid_hi componentwise",
            });
        }
        if self.grid_step.is_nan() || self.grid_step <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "grid_step",
                value: self.grid_step,
                constraint: "must be > 0",
            });
        }
        Ok(())
    }
}

/// Deterministic per-property random stream.
pub fn seeded_rng(seed: u64, label: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// Grid-search prox oracle: exhaustive lattice scan of the inner objective
/// followed by local refinement down to `grid_step / 100`. Exponential in the
/// dimension, hence capped at dim 2.
pub fn brute_force_prox(
    func: &ConvexFunction,
    lambda: f64,
    metric: &MetricMatrix,
    x: &DVector<f64>,
    oc: &OracleConfig,
) -> Result<DVector<f64>> {
    oc.validate()?;
    let dim = func.dim();
    if dim > 2 {
        return Err(Error::DimensionTooLarge(dim));
    }
    if oc.grid_lo.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: oc.grid_lo.len(),
        });
    }
    let objective = |w: &DVector<f64>| -> f64 {
        let fw = func.eval(w).expect("validated dims");
        let diff = w - x;
        fw + diff.dot(&metric.apply(&diff)) / (2.0 * lambda)
    };
    let target = oc.grid_step / 100.0;
    match dim {
        1 => {
            let mut probe = DVector::zeros(1);
            let mut eval1 = |w: f64| {
                probe[0] = w;
                objective(&probe)
            };
            let (lo, hi) = (oc.grid_lo[0], oc.grid_hi[0]);
            let mut best_w = lo;
            let mut best_v = f64::INFINITY;
            let mut w = lo;
            while w <= hi {
                let v = eval1(w);
                if v < best_v {
                    best_v = v;
                    best_w = w;
                }
                w += oc.grid_step;
            }
            // ternary refinement on the bracket around the lattice argmin
            let mut a = (best_w - oc.grid_step).max(lo);
            let mut b = (best_w + oc.grid_step).min(hi);
            while b - a > target {
                let m1 = a + (b - a) / 3.0;
                let m2 = b - (b - a) / 3.0;
                if eval1(m1) <= eval1(m2) {
                    b = m2;
                } else {
                    a = m1;
                }
            }
            Ok(DVector::from_element(1, 0.5 * (a + b)))
        }
        2 => {
            let mut probe = DVector::zeros(2);
            let mut eval2 = |u: f64, v: f64| {
                probe[0] = u;
                probe[1] = v;
                objective(&probe)
            };
            let mut best = (oc.grid_lo[0], oc.grid_lo[1]);
            let mut best_v = f64::INFINITY;
            let mut u = oc.grid_lo[0];
            while u <= oc.grid_hi[0] {
                let mut v = oc.grid_lo[1];
                while v <= oc.grid_hi[1] {
                    let val = eval2(u, v);
                    if val < best_v {
                        best_v = val;
                        best = (u, v);
                    }
                    v += oc.grid_step;
                }
                u += oc.grid_step;
            }
            // zoom grid: each round rescans an 11x11 window at 1/5 spacing
            let mut spacing = oc.grid_step;
            while spacing > target / 2.0 {
                spacing /= 5.0;
                let center = best;
                for i in -5i32..=5 {
                    for j in -5i32..=5 {
                        let u = center.0 + i as f64 * spacing;
                        let v = center.1 + j as f64 * spacing;
                        let val = eval2(u, v);
                        if val < best_v {
                            best_v = val;
                            best = (u, v);
                        }
                    }
                }
            }
            Ok(DVector::from_vec(vec![best.0, best.1]))
        }
        _ => unreachable!(),
    }
}

/// Central finite differences of the smoothed objective.
pub fn fd_gradient(
    obj: &SmoothedObjective,
    x: &DVector<f64>,
    oc: &OracleConfig,
) -> Result<DVector<f64>> {
    let h = oc.fd_step;
    let mut grad = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let plus = obj.value(&probe)?;
        probe[i] = x[i] - h;
        let minus = obj.value(&probe)?;
        probe[i] = x[i];
        grad[i] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// Independent closed-form gradient of the smoothed 1-D benchmark
/// `|x|^3 - |x|` with scalar metrics: the g-envelope formula differentiated
/// directly, and the Huber-regime derivative of the f-envelope near zero.
pub fn benchmark_gradient_closed_form(x: f64, lambda: f64, mu: f64, d1: f64, d2: f64) -> f64 {
    let a = x.abs();
    let root = (d1 * d1 + 12.0 * lambda * d1 * a).sqrt();
    let p = (-d1 + root) / (6.0 * lambda);
    let dp = d1 / root;
    let g_term = 3.0 * p * p * dp + d1 * (p - a) * (dp - 1.0) / lambda;
    let f_term = if a >= mu / d2 { 1.0 } else { d2 * a / mu };
    let grad_in_a = g_term - f_term;
    if x >= 0.0 {
        grad_in_a
    } else {
        -grad_in_a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Metric,
    Prox,
    Envelope,
    Gradient,
    DescentGd,
    DescentInertial,
    Cluster,
}

impl SuiteName {
    pub const ALL: [SuiteName; 7] = [
        SuiteName::Metric,
        SuiteName::Prox,
        SuiteName::Envelope,
        SuiteName::Gradient,
        SuiteName::DescentGd,
        SuiteName::DescentInertial,
        SuiteName::Cluster,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Metric => "metric",
            SuiteName::Prox => "prox",
            SuiteName::Envelope => "envelope",
            SuiteName::Gradient => "gradient",
            SuiteName::DescentGd => "descent_gd",
            SuiteName::DescentInertial => "descent_inertial",
            SuiteName::Cluster => "cluster",
        }
    }
}

impl std::str::FromStr for SuiteName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub name: String,
    pub samples: usize,
    pub max_slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite={} seed={}", self.suite.as_str(), self.seed)?;
        for p in &self.properties {
            writeln!(
                f,
                "{} {:<36} samples={:<4} max_slack={:>12.3e}",
                if p.passed { "PASS" } else { "FAIL" },
                p.name,
                p.samples,
                p.max_slack
            )?;
        }
        write!(
            f,
            "result: {}",
            if self.all_passed() { "PASS" } else { "FAIL" }
        )
    }
}

struct Suite {
    report: SuiteReport,
}

impl Suite {
    fn new(suite: SuiteName, seed: u64) -> Self {
        Self {
            report: SuiteReport {
                suite,
                seed,
                properties: Vec::new(),
            },
        }
    }

    fn push(&mut self, name: &str, samples: usize, max_slack: f64, tol: f64) {
        self.report.properties.push(PropertyResult {
            name: name.to_string(),
            samples,
            max_slack,
            passed: max_slack <= tol,
        });
    }

    fn push_flag(&mut self, name: &str, passed: bool) {
        self.report.properties.push(PropertyResult {
            name: name.to_string(),
            samples: 1,
            max_slack: if passed { 0.0 } else { 1.0 },
            passed,
        });
    }
}

fn sample_box(rng: &mut impl Rng, dim: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.random_range(lo..hi))
}

const SAMPLES: usize = 100;

/// Runs a named suite on the canonical 1-D benchmark instances.
pub fn run_suite(name: SuiteName, seed: u64) -> Result<SuiteReport> {
    let problem = convex::abs_cubed_minus_abs();
    let params = SmoothingParams::scalar(0.02, 0.01, 1.0, 1.0, 1.0)?;
    run_suite_on(name, &problem, &params, seed)
}

/// Runs a named suite on the given problem and smoothing configuration.
pub fn run_suite_on(
    name: SuiteName,
    problem: &DCProblem,
    params: &SmoothingParams,
    seed: u64,
) -> Result<SuiteReport> {
    match name {
        SuiteName::Metric => metric_suite(params, seed),
        SuiteName::Prox => prox_suite(problem, params, seed),
        SuiteName::Envelope => envelope_suite(problem, params, seed),
        SuiteName::Gradient => gradient_suite(problem, params, seed),
        SuiteName::DescentGd => descent_gd_suite(problem, seed),
        SuiteName::DescentInertial => descent_inertial_suite(problem, seed),
        SuiteName::Cluster => cluster_suite(problem, seed),
    }
}

fn random_spd(rng: &mut impl Rng, dim: usize, m: f64) -> DMatrix<f64> {
    // random rotation applied to eigenvalues drawn inside [1/m, m]
    let raw = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let qr = raw.qr();
    let q = qr.q();
    let eigs = DVector::from_fn(dim, |_, _| rng.random_range(1.0 / m..m));
    &q * DMatrix::from_diagonal(&eigs) * q.transpose()
}

fn metric_suite(params: &SmoothingParams, seed: u64) -> Result<SuiteReport> {
    let mut suite = Suite::new(SuiteName::Metric, seed);

    {
        let mut rng = seeded_rng(seed, "norm_equivalence");
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            let dim = rng.random_range(1..=4);
            let m = [1.5, 2.0, 3.0][rng.random_range(0..3)];
            let d = MetricMatrix::certify(random_spd(&mut rng, dim, m), m)?;
            let x = sample_box(&mut rng, dim, -3.0, 3.0);
            let n = d.norm_sq(&x)?;
            worst = worst.max(x.norm_squared() / m - n);
            worst = worst.max(n - m * x.norm_squared());
        }
        suite.push("norm_equivalence", SAMPLES, worst, 1e-10);
    }

    {
        let mut rng = seeded_rng(seed, "norm_evenness");
        let mut worst: f64 = 0.0;
        for _ in 0..SAMPLES {
            let dim = rng.random_range(1..=4);
            let d = MetricMatrix::certify(random_spd(&mut rng, dim, 2.0), 2.0)?;
            let x = sample_box(&mut rng, dim, -3.0, 3.0);
            worst = worst.max((d.norm_sq(&x)? - d.norm_sq(&(-&x))?).abs());
        }
        suite.push("norm_evenness", SAMPLES, worst, 0.0);
    }

    {
        let mut rng = seeded_rng(seed, "constants_monotone");
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            let lambda = rng.random_range(0.005..0.2);
            let mu = rng.random_range(0.005..0.2);
            let m = rng.random_range(1.0..3.0);
            let grow = rng.random_range(1.1..3.0);
            let base = constants(lambda, mu, m);
            let in_lambda = constants(lambda * grow, mu, m);
            let in_mu = constants(lambda, mu * grow, m);
            for (larger, smaller) in [(base, in_lambda), (base, in_mu)] {
                worst = worst.max(smaller.0 - larger.0);
                worst = worst.max(smaller.1 - larger.1);
            }
        }
        suite.push("constants_monotone", SAMPLES, worst, 0.0);
    }

    {
        let m = params.m().max(1.5);
        let too_big = DMatrix::from_element(1, 1, m * 1.5);
        let rejected = matches!(
            MetricMatrix::certify(too_big, m),
            Err(Error::EigenvalueOutOfRange { .. })
        );
        suite.push_flag("rejects_out_of_range", rejected);
    }

    Ok(suite.report)
}

fn constants(lambda: f64, mu: f64, m: f64) -> (f64, f64) {
    // direct formula evaluation, independent of SmoothingParams caching
    let l = (1.0 / lambda + 1.0 / mu) * (m + m * m * m);
    let a = ((-m.powi(4) * mu + mu - lambda * m * m) / (lambda * mu * m)).abs();
    let b = ((lambda * m.powi(4) + mu * m * m - lambda) / (lambda * mu * m)).abs();
    (l, a.max(b))
}

fn component_params(params: &SmoothingParams) -> [(&'static str, f64, &MetricMatrix); 2] {
    [
        ("g", params.lambda(), params.d1()),
        ("f", params.mu(), params.d2()),
    ]
}

fn prox_suite(problem: &DCProblem, params: &SmoothingParams, seed: u64) -> Result<SuiteReport> {
    let mut suite = Suite::new(SuiteName::Prox, seed);
    let dim = problem.dim();
    let funcs = [problem.g(), problem.f()];

    {
        let mut rng = seeded_rng(seed, "firm_optimality");
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            for (func, (_, lambda, metric)) in funcs.iter().zip(component_params(params)) {
                let x = sample_box(&mut rng, dim, -3.0, 3.0);
                let r = prox(&ProxRequest::new(func, lambda, metric, &x))?;
                let residual_grad = metric.apply(&(&x - &r.point)) / lambda;
                let v = sample_box(&mut rng, dim, -3.0, 3.0);
                let lower =
                    func.eval(&r.point)? + residual_grad.dot(&(&v - &r.point)) - func.eval(&v)?;
                worst = worst.max(lower);
            }
        }
        suite.push("firm_optimality", SAMPLES, worst, 1e-8);
    }

    {
        let mut rng = seeded_rng(seed, "strong_convexity_anchor");
        let mut worst = f64::NEG_INFINITY;
        let m = params.m();
        for _ in 0..SAMPLES {
            for (func, (_, lambda, metric)) in funcs.iter().zip(component_params(params)) {
                if !func.has_subgrad() {
                    continue;
                }
                let x = sample_box(&mut rng, dim, -3.0, 3.0);
                let z1 = sample_box(&mut rng, dim, -3.0, 3.0);
                let z2 = sample_box(&mut rng, dim, -3.0, 3.0);
                let lhs = metric_function(func, lambda, metric, &z2, &x)?
                    - metric_function(func, lambda, metric, &z1, &x)?;
                let grad =
                    func.subgrad(&z1)?.expect("checked") + metric.apply(&(&z1 - &x)) / lambda;
                let rhs = grad.dot(&(&z2 - &z1)) + (&z2 - &z1).norm_squared() / (2.0 * lambda * m);
                worst = worst.max(rhs - lhs);
            }
        }
        suite.push("strong_convexity_anchor", SAMPLES, worst, 1e-8);
    }

    for (tag, lambda, metric) in component_params(params) {
        let func = if tag == "g" { problem.g() } else { problem.f() };
        let check = prox_lipschitz_check(func, lambda, metric, params.m(), 200, seed ^ 0x5117)?;
        suite.push(
            &format!("lipschitz_ratio_{tag}"),
            check.samples,
            check.max_ratio - check.bound,
            1e-8,
        );
    }

    if dim <= 2 {
        let mut rng = seeded_rng(seed, "grid_oracle_agreement");
        let oc = OracleConfig::new(dim);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..25 {
            for (func, (_, lambda, metric)) in funcs.iter().zip(component_params(params)) {
                let x = sample_box(&mut rng, dim, -2.5, 2.5);
                let fast = prox(&ProxRequest::new(func, lambda, metric, &x))?;
                let slow = brute_force_prox(func, lambda, metric, &x, &oc)?;
                worst = worst.max((&fast.point - &slow).norm());
            }
        }
        let tol = if dim == 1 { 1e-5 } else { 1e-4 };
        suite.push("grid_oracle_agreement", 50, worst, tol);

        let mut rng = seeded_rng(seed, "grid_oracle_self_consistent");
        let mut fine = oc.clone();
        fine.grid_step = oc.grid_step / 10.0;
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..10 {
            let x = sample_box(&mut rng, dim, -2.5, 2.5);
            let coarse = brute_force_prox(problem.g(), params.lambda(), params.d1(), &x, &oc)?;
            let finer = brute_force_prox(problem.g(), params.lambda(), params.d1(), &x, &fine)?;
            worst = worst.max((&coarse - &finer).norm() - oc.grid_step / 10.0);
        }
        suite.push("grid_oracle_self_consistent", 10, worst, 0.0);
    }

    if dim == 1 {
        let mut rng = seeded_rng(seed, "analytic_vs_inner_solver");
        let mut worst = f64::NEG_INFINITY;
        for (func, (_, lambda, metric)) in funcs.iter().zip(component_params(params)) {
            if !(func.has_analytic_prox() && func.has_subgrad()) {
                continue;
            }
            let stripped = strip_analytic_prox(func);
            for _ in 0..SAMPLES {
                let x = sample_box(&mut rng, 1, -3.0, 3.0);
                let fast = prox(&ProxRequest::new(func, lambda, metric, &x))?;
                let slow = prox(&ProxRequest::new(&stripped, lambda, metric, &x))?;
                worst = worst.max((&fast.point - &slow.point).norm());
            }
        }
        suite.push("analytic_vs_inner_solver", 2 * SAMPLES, worst, 1e-6);
    }

    Ok(suite.report)
}

/// Rebuilds a function without its analytic prox, forcing the generic routes.
pub fn strip_analytic_prox(func: &ConvexFunction) -> ConvexFunction {
    let eval_src = func.clone();
    let sub_src = func.clone();
    let mut rebuilt = ConvexFunction::new(
        format!("{}_no_analytic", func.name()),
        func.dim(),
        move |x| eval_src.eval(x).expect("validated dims"),
    );
    if func.has_subgrad() {
        rebuilt = rebuilt.with_subgrad(move |x| {
            sub_src
                .subgrad(x)
                .expect("validated dims")
                .expect("present")
        });
    }
    rebuilt
}

fn envelope_suite(problem: &DCProblem, params: &SmoothingParams, seed: u64) -> Result<SuiteReport> {
    let mut suite = Suite::new(SuiteName::Envelope, seed);
    let dim = problem.dim();
    let funcs = [problem.g(), problem.f()];

    {
        let mut rng = seeded_rng(seed, "envelope_domination");
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            for (func, (_, lambda, metric)) in funcs.iter().zip(component_params(params)) {
                let x = sample_box(&mut rng, dim, -3.0, 3.0);
                let r = prox(&ProxRequest::new(func, lambda, metric, &x))?;
                worst = worst.max(r.envelope_value - func.eval(&x)?);
            }
        }
        suite.push("envelope_domination", SAMPLES, worst, 1e-10);
    }

    {
        let mut rng = seeded_rng(seed, "envelope_value_consistency");
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            for (func, (_, lambda, metric)) in funcs.iter().zip(component_params(params)) {
                let x = sample_box(&mut rng, dim, -3.0, 3.0);
                let r = prox(&ProxRequest::new(func, lambda, metric, &x))?;
                let diff = &r.point - &x;
                let recomputed = func.eval(&r.point)? + metric.norm_sq(&diff)? / (2.0 * lambda);
                let scale = 1.0_f64.max(r.envelope_value.abs());
                worst = worst.max((recomputed - r.envelope_value).abs() / scale);
            }
        }
        suite.push("envelope_value_consistency", SAMPLES, worst, 1e-12);
    }

    if dim <= 2 {
        let mut rng = seeded_rng(seed, "envelope_grid_min");
        let oc = OracleConfig::new(dim);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..20 {
            for (func, (_, lambda, metric)) in funcs.iter().zip(component_params(params)) {
                let x = sample_box(&mut rng, dim, -2.5, 2.5);
                let r = prox(&ProxRequest::new(func, lambda, metric, &x))?;
                let w = brute_force_prox(func, lambda, metric, &x, &oc)?;
                let diff = &w - &x;
                let grid_value = func.eval(&w)? + metric.norm_sq(&diff)? / (2.0 * lambda);
                // strict inequality would mean the oracle found a lower point
                worst = worst.max(r.envelope_value - grid_value - 1e-9);
            }
        }
        suite.push("envelope_grid_min", 40, worst, 1e-6);
    }

    if dim == 1 {
        // the envelope keeps the minimizers of the function it smooths
        let mut worst = f64::NEG_INFINITY;
        for (func, (_, lambda, metric)) in funcs.iter().zip(component_params(params)) {
            let scan = |v: &dyn Fn(f64) -> f64| -> f64 {
                let mut best = (-3.0, f64::INFINITY);
                let mut x = -3.0;
                while x <= 3.0 {
                    let val = v(x);
                    if val < best.1 {
                        best = (x, val);
                    }
                    x += 0.01;
                }
                best.0
            };
            let of_func = scan(&|x| func.eval(&DVector::from_element(1, x)).unwrap());
            let of_env = scan(&|x| {
                prox(&ProxRequest::new(
                    func,
                    lambda,
                    metric,
                    &DVector::from_element(1, x),
                ))
                .unwrap()
                .envelope_value
            });
            worst = worst.max((of_func - of_env).abs() - 0.011);
        }
        suite.push("argmin_preservation", 601, worst, 0.0);
    }

    if problem.f().name() == "abs" && dim == 1 && params.d2().is_diagonal() {
        let mut rng = seeded_rng(seed, "huber_closed_form");
        let d = params.d2().entries()[(0, 0)];
        let mu = params.mu();
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            let x: f64 = rng.random_range(-3.0..3.0);
            let expected = if x.abs() >= mu / d {
                x.abs() - mu / (2.0 * d)
            } else {
                d * x * x / (2.0 * mu)
            };
            let got = crate::prox::envelope_value(
                problem.f(),
                mu,
                params.d2(),
                &DVector::from_element(1, x),
            )?;
            worst = worst.max((got - expected).abs());
        }
        suite.push("huber_closed_form", SAMPLES, worst, 1e-12);
    }

    Ok(suite.report)
}

fn gradient_suite(problem: &DCProblem, params: &SmoothingParams, seed: u64) -> Result<SuiteReport> {
    let mut suite = Suite::new(SuiteName::Gradient, seed);
    let dim = problem.dim();
    let obj = SmoothedObjective::new(problem.clone(), params.clone())?;
    let oc = OracleConfig::new(dim);

    {
        let mut rng = seeded_rng(seed, "fd_agreement");
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            let x = sample_box(&mut rng, dim, -3.0, 3.0);
            let g = obj.gradient(&x)?;
            let fd = fd_gradient(&obj, &x, &oc)?;
            let rel = (&g - &fd).norm() / 1.0_f64.max(fd.norm());
            worst = worst.max(rel);
        }
        suite.push("fd_agreement", SAMPLES, worst, 1e-4);
    }

    {
        let mut rng = seeded_rng(seed, "gradient_lipschitz");
        let mut worst = f64::NEG_INFINITY;
        let l = obj.grad_lipschitz();
        for _ in 0..SAMPLES {
            let x = sample_box(&mut rng, dim, -3.0, 3.0);
            let y = sample_box(&mut rng, dim, -3.0, 3.0);
            let dg = (obj.gradient(&x)? - obj.gradient(&y)?).norm();
            worst = worst.max(dg - l * (&x - &y).norm());
        }
        suite.push("gradient_lipschitz", SAMPLES, worst, 1e-8);
    }

    {
        let mut rng = seeded_rng(seed, "gradient_quadform");
        let mut worst = f64::NEG_INFINITY;
        let q = obj.grad_quadform_bound();
        for _ in 0..SAMPLES {
            let x = sample_box(&mut rng, dim, -3.0, 3.0);
            let y = sample_box(&mut rng, dim, -3.0, 3.0);
            let inner = (obj.gradient(&x)? - obj.gradient(&y)?).dot(&(&x - &y));
            worst = worst.max(inner.abs() - q * (&x - &y).norm_squared());
        }
        suite.push("gradient_quadform", SAMPLES, worst, 1e-8);
    }

    {
        let mut rng = seeded_rng(seed, "anchored_identity");
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            let x = sample_box(&mut rng, dim, -3.0, 3.0);
            let at = obj.eval_at(&x)?;
            let mg = metric_function(
                problem.g(),
                params.lambda(),
                params.d1(),
                &at.prox_g.point,
                &x,
            )?;
            let mf = metric_function(problem.f(), params.mu(), params.d2(), &at.prox_f.point, &x)?;
            let rebuilt = problem.value(&x)? + mg - mf;
            worst = worst.max((rebuilt - at.value()).abs());
        }
        suite.push("anchored_identity", SAMPLES, worst, 1e-10);
    }

    if params.sandwich_admissible() {
        let mut rng = seeded_rng(seed, "sandwich_bounds");
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            let x = sample_box(&mut rng, dim, -3.0, 3.0);
            let v = obj.value(&x)?;
            let (lo, hi) = obj.sandwich_bounds(&x)?;
            worst = worst.max(lo - v);
            worst = worst.max(v - hi);
        }
        suite.push("sandwich_bounds", SAMPLES, worst, 1e-9);
    }

    {
        let mut rng = seeded_rng(seed, "epsilon_radius");
        let mut worst = f64::NEG_INFINITY;
        let m = params.m();
        for _ in 0..SAMPLES {
            let x = sample_box(&mut rng, dim, -3.0, 3.0);
            let at = obj.eval_at(&x)?;
            let z = at.prox_g.point.clone();
            let zbar = &z + sample_box(&mut rng, dim, -0.5, 0.5);
            let eps = (metric_function(problem.g(), params.lambda(), params.d1(), &zbar, &x)?
                - metric_function(problem.g(), params.lambda(), params.d1(), &z, &x)?)
            .abs();
            worst = worst.max((&zbar - &z).norm_squared() - 2.0 * m * params.lambda() * eps);
        }
        suite.push("epsilon_radius", SAMPLES, worst, 1e-10);
    }

    if problem.g().name() == "abs_cubed"
        && problem.f().name() == "abs"
        && dim == 1
        && params.d1().is_diagonal()
        && params.d2().is_diagonal()
    {
        let mut rng = seeded_rng(seed, "closed_form_gradient");
        let d1 = params.d1().entries()[(0, 0)];
        let d2 = params.d2().entries()[(0, 0)];
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            let x: f64 = rng.random_range(-3.0..3.0);
            let expected = benchmark_gradient_closed_form(x, params.lambda(), params.mu(), d1, d2);
            let got = obj.gradient(&DVector::from_element(1, x))?[0];
            worst = worst.max((got - expected).abs());
        }
        suite.push("closed_form_gradient", SAMPLES, worst, 1e-8);
    }

    if problem.g().name() == "abs_cubed"
        && problem.f().name() == "abs"
        && dim == 1
        && params.d1().is_diagonal()
        && params.d2().is_diagonal()
    {
        // Sharp offset of the smoothed minimum on this benchmark: at the
        // smoothed stationary point the g-prox sits at the true minimizer,
        // which gives min Phi_s = min Phi + mu/(2 d2) - lambda/(2 d1)
        // exactly. (The smoothed minimum is NOT always >= the original one;
        // the offset is negative whenever lambda/d1 > mu/d2.)
        let d1 = params.d1().entries()[(0, 0)];
        let d2 = params.d2().entries()[(0, 0)];
        let expected_offset = params.mu() / (2.0 * d2) - params.lambda() / (2.0 * d1);
        let mut min_phi = f64::INFINITY;
        let mut min_smooth = f64::INFINITY;
        let mut x = -3.0;
        while x <= 3.0 {
            let p = DVector::from_element(1, x);
            min_phi = min_phi.min(problem.value(&p)?);
            min_smooth = min_smooth.min(obj.value(&p)?);
            x += 0.01;
        }
        let measured_offset = min_smooth - min_phi;
        suite.push(
            "smoothed_min_offset",
            601,
            (measured_offset - expected_offset).abs(),
            1e-3,
        );
    }

    Ok(suite.report)
}

fn benchmark_objective(lambda: f64, mu: f64, problem: &DCProblem) -> Result<SmoothedObjective> {
    let params = SmoothingParams::scalar(lambda, mu, 1.0, 1.0, 1.0)?;
    SmoothedObjective::new(problem.clone(), params)
}

fn descent_gd_suite(problem: &DCProblem, seed: u64) -> Result<SuiteReport> {
    let mut suite = Suite::new(SuiteName::DescentGd, seed);
    let obj = benchmark_objective(0.01, 0.01, problem)?;
    let x0 = DVector::from_element(problem.dim(), 1.0);

    let rejected = matches!(
        run_gd(&obj, &SolverConfig::gd(2.5), &x0),
        Err(Error::AdmissibilityViolation(_))
    );
    suite.push_flag("rejects_gamma_out_of_range", rejected);

    for gamma in [0.5, 1.0, 1.8] {
        let r = run_gd(&obj, &SolverConfig::gd(gamma), &x0)?;
        let tag = format!("gamma_{gamma}");
        suite.push(
            &format!("monotone_descent_{tag}"),
            r.iterations,
            r.monitors.monotone_max_slack,
            MONITOR_SLACK,
        );
        suite.push(
            &format!("sufficient_decrease_{tag}"),
            r.iterations,
            r.monitors.sufficient_decrease_max_slack,
            MONITOR_SLACK,
        );
        suite.push(
            &format!("residual_rate_{tag}"),
            r.iterations,
            r.monitors.residual_bound_slack,
            MONITOR_SLACK,
        );
        if let Some(ok) = r.monitors.coercivity_ok {
            suite.push_flag(&format!("coercivity_floor_{tag}"), ok);
        }
    }

    {
        let a = run_gd(&obj, &SolverConfig::gd(1.8), &x0)?;
        let b = run_gd(&obj, &SolverConfig::gd(1.8), &x0)?;
        let identical = a.iterations == b.iterations && a.final_x == b.final_x;
        suite.push_flag("deterministic_rerun", identical);
    }

    Ok(suite.report)
}

fn descent_inertial_suite(problem: &DCProblem, seed: u64) -> Result<SuiteReport> {
    let mut suite = Suite::new(SuiteName::DescentInertial, seed);
    let obj = benchmark_objective(0.01, 0.01, problem)?;
    let x0 = DVector::from_element(problem.dim(), 1.0);

    let rejected = matches!(
        run_inertial(&obj, &SolverConfig::inertial(0.2), &x0, &x0),
        Err(Error::AdmissibilityViolation(_))
    );
    suite.push_flag("rejects_gamma_below_floor", rejected);

    let cfg = SolverConfig::inertial(0.9);
    let r = run_inertial(&obj, &cfg, &x0, &x0)?;
    suite.push(
        "extrapolation_inequality",
        r.iterations,
        r.monitors.extrapolation_max_slack,
        MONITOR_SLACK,
    );
    suite.push(
        "step_recursion",
        r.iterations,
        r.monitors.recursion_max_slack,
        MONITOR_SLACK,
    );
    suite.push_flag("square_summable_steps", r.monitors.step_sq_sum.is_finite());

    {
        let gd = run_gd(&obj, &SolverConfig::gd(0.9), &x0)?;
        let mut zero_cfg = SolverConfig::inertial(0.9);
        zero_cfg.theta_policy = ThetaPolicy::Zero;
        let reduced = run_inertial(&obj, &zero_cfg, &x0, &x0)?;
        let identical = gd.iterations == reduced.iterations && gd.final_x == reduced.final_x;
        suite.push_flag("zero_theta_reduction", identical);
    }

    {
        // spot value cross-checked with exact rational arithmetic: 11/175
        let b = solver::theta_bound(0.9, 0.99, 400.0, 100.0);
        suite.push("theta_bound_spot_value", 1, (b - 11.0 / 175.0).abs(), 1e-12);
    }

    Ok(suite.report)
}

fn cluster_suite(problem: &DCProblem, seed: u64) -> Result<SuiteReport> {
    let mut suite = Suite::new(SuiteName::Cluster, seed);
    let mu = 0.01;
    let lambdas = [0.02, 0.015, 0.011, 0.0101];
    let mut gaps = Vec::new();
    let mut worst_identity = f64::NEG_INFINITY;
    let mut worst_radius = f64::NEG_INFINITY;

    for &lambda in &lambdas {
        let obj = benchmark_objective(lambda, mu, problem)?;
        let mut cfg = SolverConfig::gd(1.8);
        cfg.tol = 1e-6;
        let r = run_gd(&obj, &cfg, &DVector::from_element(problem.dim(), 1.0))?;
        let report = stationarity_report(&obj, &r.final_x)?;
        gaps.push(report.phi_gap.abs());

        // |prox_g - prox_f| equals the mismatch operator applied to the
        // g-envelope gradient, up to mu * m * |grad gap| at near-stationarity
        let at = obj.eval_at(&r.final_x)?;
        let gap_norm = (&at.grad_g - &at.grad_f).norm();
        let tolerance = mu * obj.params().m() * gap_norm;
        worst_identity = worst_identity
            .max((report.prox_gap_norm - report.operator_residual_norm).abs() - tolerance);

        // the f-prox point is an eps-approximation of the g-prox point with
        // eps read off the anchored metric difference; radius bound follows
        let eps = (metric_function(
            problem.f(),
            mu,
            obj.params().d2(),
            &at.prox_g.point,
            &r.final_x,
        )? - metric_function(
            problem.f(),
            mu,
            obj.params().d2(),
            &at.prox_f.point,
            &r.final_x,
        )?)
        .abs();
        worst_radius = worst_radius.max(
            (&at.prox_g.point - &at.prox_f.point).norm_squared()
                - 2.0 * obj.params().m() * mu * eps,
        );
    }

    let mut worst_increase = f64::NEG_INFINITY;
    for pair in gaps.windows(2) {
        worst_increase = worst_increase.max(pair[1] - pair[0]);
    }
    suite.push(
        "phi_gap_nonincreasing",
        lambdas.len(),
        worst_increase,
        1e-12,
    );
    suite.push(
        "phi_gap_final_fifth",
        lambdas.len(),
        gaps[gaps.len() - 1] - gaps[0] / 5.0,
        0.0,
    );
    suite.push("prox_gap_identity", lambdas.len(), worst_identity, 1e-10);
    suite.push("eps_radius_at_limit", lambdas.len(), worst_radius, 1e-10);

    let _ = seed; // cluster properties are grid-driven, no sampling stream
    Ok(suite.report)
}
