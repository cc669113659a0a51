//! The metric proximal operator
//! `prox(x) = argmin_w { g(w) + (1/2 lambda) |w - x|^2_D }`
//! and the envelope value it defines.
//!
//! Dispatch order: analytic formula when the catalog provides one for the
//! requested metric; 1-D bisection on the monotone optimality condition when
//! a subgradient oracle exists; otherwise an iterative inner solver on the
//! strongly convex inner objective.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex::ConvexFunction;
use crate::error::{Error, Result};
use crate::metric::MetricMatrix;

pub const DEFAULT_INNER_TOL: f64 = 1e-10;
pub const DEFAULT_INNER_MAX_ITER: usize = 10_000;

/// A single prox evaluation request.
#[derive(Clone)]
pub struct ProxRequest<'a> {
    pub func: &'a ConvexFunction,
    pub lambda: f64,
    pub metric: &'a MetricMatrix,
    pub x: &'a DVector<f64>,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
}

impl<'a> ProxRequest<'a> {
    pub fn new(
        func: &'a ConvexFunction,
        lambda: f64,
        metric: &'a MetricMatrix,
        x: &'a DVector<f64>,
    ) -> Self {
        Self {
            func,
            lambda,
            metric,
            x,
            inner_tol: DEFAULT_INNER_TOL,
            inner_max_iter: DEFAULT_INNER_MAX_ITER,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.func.dim() != self.x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.func.dim(),
                got: self.x.len(),
            });
        }
        if self.metric.dim() != self.x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.x.len(),
                got: self.metric.dim(),
            });
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                constraint: "must be finite and > 0",
            });
        }
        Ok(())
    }

    fn inner_objective(&self, w: &DVector<f64>) -> f64 {
        let diff = w - self.x;
        self.func.eval(w).expect("dimension already validated") + self.metric_quad(&diff)
    }

    fn metric_quad(&self, diff: &DVector<f64>) -> f64 {
        diff.dot(&self.metric.apply(diff)) / (2.0 * self.lambda)
    }
}

/// Prox point plus the envelope value at the query point.
#[derive(Debug, Clone)]
pub struct ProxResult {
    pub point: DVector<f64>,
    pub envelope_value: f64,
    pub inner_iterations: usize,
    pub residual: f64,
}

/// Computes the metric prox. The minimizer is unique (the inner objective is
/// `1/(lambda m)`-strongly convex), so every dispatch route targets the same
/// point.
pub fn prox(req: &ProxRequest) -> Result<ProxResult> {
    req.validate()?;
    if let Some(point) = req.func.try_analytic_prox(req.lambda, req.metric, req.x)? {
        let envelope_value = envelope_at(req, &point);
        return Ok(ProxResult {
            point,
            envelope_value,
            inner_iterations: 0,
            residual: 0.0,
        });
    }
    if req.func.dim() == 1 && req.func.has_subgrad() {
        return prox_bisection(req);
    }
    prox_iterative(req)
}

/// Envelope value `g(prox) + (1/2 lambda)|prox - x|^2_D`.
pub fn envelope_value(
    func: &ConvexFunction,
    lambda: f64,
    metric: &MetricMatrix,
    x: &DVector<f64>,
) -> Result<f64> {
    Ok(prox(&ProxRequest::new(func, lambda, metric, x))?.envelope_value)
}

fn envelope_at(req: &ProxRequest, point: &DVector<f64>) -> f64 {
    let diff = point - req.x;
    req.func.eval(point).expect("validated dims") + req.metric_quad(&diff)
}

/// 1-D bisection on the increasing map `w -> s(w) + d (w - x) / lambda`,
/// bracketing from `x` with radius `2 lambda m |s(x)|` expanded geometrically
/// until a sign change.
fn prox_bisection(req: &ProxRequest) -> Result<ProxResult> {
    let d = req.metric.entries()[(0, 0)];
    let x = req.x[0];
    let m = req.metric.bound();
    let h = |w: f64| -> f64 {
        let wv = DVector::from_element(1, w);
        let s = req
            .func
            .subgrad(&wv)
            .expect("validated dims")
            .expect("dispatch requires subgrad");
        s[0] + d * (w - x) / req.lambda
    };
    let s_at_x = h(x);
    if s_at_x == 0.0 {
        let point = DVector::from_element(1, x);
        let envelope_value = envelope_at(req, &point);
        return Ok(ProxResult {
            point,
            envelope_value,
            inner_iterations: 0,
            residual: 0.0,
        });
    }
    let mut radius = 2.0 * req.lambda * m * s_at_x.abs().max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = (x - radius, x + radius);
    let mut expansions = 0usize;
    while h(lo) > 0.0 {
        radius *= 2.0;
        lo = x - radius;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::InnerSolverDiverged {
                residual: f64::INFINITY,
                iterations: expansions,
            });
        }
    }
    while h(hi) < 0.0 {
        radius *= 2.0;
        hi = x + radius;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::InnerSolverDiverged {
                residual: f64::INFINITY,
                iterations: expansions,
            });
        }
    }
    let mut iterations = 0usize;
    while hi - lo > req.inner_tol && iterations < req.inner_max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval exhausted at f64 resolution
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let residual = hi - lo;
    if residual > req.inner_tol && iterations >= req.inner_max_iter {
        return Err(Error::InnerSolverDiverged {
            residual,
            iterations,
        });
    }
    let point = DVector::from_element(1, 0.5 * (lo + hi));
    let envelope_value = envelope_at(req, &point);
    Ok(ProxResult {
        point,
        envelope_value,
        inner_iterations: iterations,
        residual,
    })
}

/// Iterative inner solver on `F(w) = g(w) + (1/2 lambda)|w - x|^2_D`.
///
/// Preferred route: accelerated proximal gradient splitting `F` into the
/// smooth metric quadratic and `g`, using the function's own
/// identity-metric prox for the proximal step (available e.g. for l1 and box
/// under any requested metric). Fallback: backtracking (sub)gradient descent,
/// which is linearly convergent whenever the subgradient oracle is an actual
/// gradient. Terminates on the fixed-point residual `|w_{k+1} - w_k|`.
pub fn prox_iterative(req: &ProxRequest) -> Result<ProxResult> {
    req.validate()?;
    let dim = req.func.dim();
    let identity = MetricMatrix::identity(dim);
    let probe = req.func.try_analytic_prox(req.lambda, &identity, req.x)?;
    if probe.is_some() {
        return prox_accelerated_splitting(req, &identity);
    }
    if req.func.has_subgrad() {
        return prox_backtracking_descent(req);
    }
    Err(Error::MissingOracles {
        func: req.func.name().to_string(),
        reason: "no subgradient oracle and no identity-metric prox to split on",
    })
}

fn prox_accelerated_splitting(req: &ProxRequest, identity: &MetricMatrix) -> Result<ProxResult> {
    let (eig_min, eig_max) = req.metric.eig_range();
    let step = req.lambda / eig_max;
    let kappa = eig_max / eig_min;
    let beta = (kappa.sqrt() - 1.0) / (kappa.sqrt() + 1.0);

    let grad_quad = |w: &DVector<f64>| req.metric.apply(&(w - req.x)) / req.lambda;
    let prox_step = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let shifted = v - grad_quad(v) * step;
        req.func
            .try_analytic_prox(step, identity, &shifted)?
            .ok_or(Error::MissingOracles {
                func: req.func.name().to_string(),
                reason: "identity-metric prox became unavailable mid-solve",
            })
    };

    let mut w = prox_step(req.x)?;
    let mut w_prev = w.clone();
    let mut f_curr = req.inner_objective(&w);
    for k in 0..req.inner_max_iter {
        let extrapolated = &w + (&w - &w_prev) * beta;
        let mut w_next = prox_step(&extrapolated)?;
        let mut f_next = req.inner_objective(&w_next);
        if f_next > f_curr {
            // monotone safeguard: retry the step without momentum
            w_next = prox_step(&w)?;
            f_next = req.inner_objective(&w_next);
        }
        let residual = (&w_next - &w).norm();
        w_prev = w;
        w = w_next;
        f_curr = f_next;
        if residual <= req.inner_tol {
            let envelope_value = envelope_at(req, &w);
            return Ok(ProxResult {
                point: w,
                envelope_value,
                inner_iterations: k + 1,
                residual,
            });
        }
    }
    Err(Error::InnerSolverDiverged {
        residual: (&w - &w_prev).norm(),
        iterations: req.inner_max_iter,
    })
}

fn prox_backtracking_descent(req: &ProxRequest) -> Result<ProxResult> {
    let (_, eig_max) = req.metric.eig_range();
    let mut step = req.lambda / eig_max;
    let mut w = req.x.clone();
    let mut f_curr = req.inner_objective(&w);
    let mut last_residual = f64::INFINITY;
    for k in 0..req.inner_max_iter {
        let s = req
            .func
            .subgrad(&w)?
            .expect("dispatch requires subgrad oracle");
        let grad = s + req.metric.apply(&(&w - req.x)) / req.lambda;
        let g_sq = grad.norm_squared();
        if g_sq == 0.0 {
            let envelope_value = envelope_at(req, &w);
            return Ok(ProxResult {
                point: w,
                envelope_value,
                inner_iterations: k,
                residual: 0.0,
            });
        }
        let mut t = step;
        let mut w_next = &w - &grad * t;
        let mut f_next = req.inner_objective(&w_next);
        let mut backtracks = 0;
        while f_next > f_curr - 0.5 * t * g_sq && backtracks < 60 {
            t *= 0.5;
            w_next = &w - &grad * t;
            f_next = req.inner_objective(&w_next);
            backtracks += 1;
        }
        let residual = (&w_next - &w).norm();
        w = w_next;
        f_curr = f_next;
        last_residual = residual;
        step = (t * 1.5).min(req.lambda / eig_max * 8.0);
        if residual <= req.inner_tol {
            let envelope_value = envelope_at(req, &w);
            return Ok(ProxResult {
                point: w,
                envelope_value,
                inner_iterations: k + 1,
                residual,
            });
        }
    }
    Err(Error::InnerSolverDiverged {
        residual: last_residual,
        iterations: req.inner_max_iter,
    })
}

/// Empirical check of the `m^2` Lipschitz bound of the metric prox.
#[derive(Debug, Clone)]
pub struct LipschitzCheck {
    pub max_ratio: f64,
    pub bound: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Samples `samples` pairs in `[-3, 3]^dim` and reports the largest observed
/// ratio `|prox(x) - prox(y)| / |x - y|` against the bound `m^2`.
pub fn prox_lipschitz_check(
    func: &ConvexFunction,
    lambda: f64,
    metric: &MetricMatrix,
    m: f64,
    samples: usize,
    seed: u64,
) -> Result<LipschitzCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = func.dim();
    let mut max_ratio: f64 = 0.0;
    for _ in 0..samples {
        let x = DVector::from_fn(dim, |_, _| rng.random_range(-3.0..3.0));
        let y = DVector::from_fn(dim, |_, _| rng.random_range(-3.0..3.0));
        let dxy = (&x - &y).norm();
        if dxy < 1e-12 {
            continue;
        }
        let px = prox(&ProxRequest::new(func, lambda, metric, &x))?.point;
        let py = prox(&ProxRequest::new(func, lambda, metric, &y))?.point;
        max_ratio = max_ratio.max((px - py).norm() / dxy);
    }
    let bound = m * m;
    Ok(LipschitzCheck {
        max_ratio,
        bound,
        samples,
        passed: max_ratio <= bound + 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex;

    fn v1(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn analytic_route_matches_closed_form() {
        let g = convex::abs_cubed();
        let d = MetricMatrix::identity(1);
        let x = v1(1.0);
        let r = prox(&ProxRequest::new(&g, 0.01, &d, &x)).unwrap();
        assert!((r.point[0] - 0.971_675_407_097_272_2).abs() < 1e-12);
        assert_eq!(r.inner_iterations, 0);
    }

    #[test]
    fn prox_fixed_point_at_minimizer() {
        let f = convex::abs();
        let d = MetricMatrix::identity(1);
        let x = v1(0.0);
        let r = prox(&ProxRequest::new(&f, 0.3, &d, &x)).unwrap();
        assert_eq!(r.point[0], 0.0);
        assert_eq!(r.envelope_value, 0.0); // inf f at the fixed point
    }

    #[test]
    fn bisection_agrees_with_analytic_on_catalog() {
        let d = MetricMatrix::scalar(1.5, 2.0).unwrap();
        for func in [convex::abs(), convex::abs_cubed()] {
            let stripped = ConvexFunctionNoProx::of(&func);
            for k in 0..40 {
                let x = v1(-2.0 + 0.1 * k as f64);
                let want = prox(&ProxRequest::new(&func, 0.05, &d, &x)).unwrap();
                let got = prox(&ProxRequest::new(&stripped.0, 0.05, &d, &x)).unwrap();
                assert!(
                    (want.point[0] - got.point[0]).abs() < 1e-8,
                    "bisection drifted at x = {}: {} vs {}",
                    x[0],
                    want.point[0],
                    got.point[0]
                );
            }
        }
    }

    // Rebuilds a catalog entry with the analytic prox removed, to force the
    // non-analytic dispatch routes in tests.
    pub(crate) struct ConvexFunctionNoProx(pub ConvexFunction);
    impl ConvexFunctionNoProx {
        pub(crate) fn of(f: &ConvexFunction) -> Self {
            let inner = f.clone();
            let name = format!("{}_stripped", f.name());
            let dim = f.dim();
            let eval_f = f.clone();
            let mut rebuilt =
                ConvexFunction::new(name, dim, move |x| eval_f.eval(x).expect("validated"));
            if f.has_subgrad() {
                rebuilt = rebuilt
                    .with_subgrad(move |x| inner.subgrad(x).expect("validated").expect("present"));
            }
            Self(rebuilt)
        }
    }

    #[test]
    fn quadratic_iterative_matches_linear_solve() {
        use nalgebra::DMatrix;
        let a = DMatrix::from_row_slice(3, 3, &[1.2, 0.3, 0.0, 0.3, 0.9, 0.1, 0.0, 0.1, 1.1]);
        let b = DVector::from_vec(vec![0.4, -0.2, 0.9]);
        let q = convex::quadratic(a, b).unwrap();
        let d = MetricMatrix::certify(
            nalgebra::dmatrix![1.0, 0.1, 0.0; 0.1, 1.2, 0.0; 0.0, 0.0, 0.8],
            2.0,
        )
        .unwrap();
        let x = DVector::from_vec(vec![1.0, 2.0, -0.5]);
        let direct = prox(&ProxRequest::new(&q, 0.3, &d, &x)).unwrap();
        let mut req = ProxRequest::new(&q, 0.3, &d, &x);
        req.inner_tol = 1e-12;
        let stripped = ConvexFunctionNoProx::of(&q).0;
        let req_forced = ProxRequest {
            func: &stripped,
            ..req
        };
        let iterative = prox_iterative(&req_forced).unwrap();
        assert!((&direct.point - &iterative.point).norm() < 1e-8);
    }

    #[test]
    fn l1_iterative_splitting_matches_soft_threshold() {
        let f = convex::l1(2);
        let d = MetricMatrix::certify(nalgebra::dmatrix![1.0, 0.0; 0.0, 1.6], 2.0).unwrap();
        let x = DVector::from_vec(vec![1.0, -0.05]);
        let analytic = prox(&ProxRequest::new(&f, 0.1, &d, &x)).unwrap();
        let mut forced = ProxRequest::new(&f, 0.1, &d, &x);
        forced.inner_tol = 1e-12;
        let iter = prox_iterative(&forced).unwrap();
        assert!((&analytic.point - &iter.point).norm() < 1e-6);
        assert!((analytic.point[0] - 0.9).abs() < 1e-12);
        assert_eq!(analytic.point[1], 0.0);
    }

    #[test]
    fn box_without_oracles_under_full_metric_reports_missing() {
        let b = convex::box_indicator(DVector::zeros(2), DVector::from_element(2, 1.0)).unwrap();
        let full = MetricMatrix::certify(nalgebra::dmatrix![1.0, 0.3; 0.3, 1.0], 2.0).unwrap();
        let x = DVector::from_vec(vec![2.0, 2.0]);
        // identity-prox splitting still applies, so this solves the QP.
        let r = prox(&ProxRequest::new(&b, 0.5, &full, &x)).unwrap();
        assert!(r.point.iter().all(|v| *v <= 1.0 + 1e-9));

        // A function with neither subgradient nor any analytic prox is out.
        let bare = ConvexFunction::new("bare", 2, |x: &DVector<f64>| x.norm_squared());
        match prox(&ProxRequest::new(&bare, 0.5, &full, &x)) {
            Err(Error::MissingOracles { .. }) => {}
            other => panic!("expected MissingOracles, got {other:?}"),
        }
    }

    #[test]
    fn identity_metric_prox_is_nonexpansive() {
        let d = MetricMatrix::identity(1);
        for func in [convex::abs(), convex::abs_cubed()] {
            let check = prox_lipschitz_check(&func, 0.05, &d, 1.0, 200, 42).unwrap();
            assert!(check.passed, "ratio {} > 1", check.max_ratio);
            assert!(check.max_ratio <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn constant_function_prox_is_identity_map() {
        let c = ConvexFunction::new("const", 1, |_x: &DVector<f64>| 1.25)
            .with_subgrad(|_x| DVector::zeros(1));
        let d = MetricMatrix::scalar(1.5, 2.0).unwrap();
        let r = prox(&ProxRequest::new(&c, 0.2, &d, &v1(0.8))).unwrap();
        assert!((r.point[0] - 0.8).abs() < 1e-10);
        let check = prox_lipschitz_check(&c, 0.2, &d, 2.0, 50, 3).unwrap();
        assert!((check.max_ratio - 1.0).abs() < 1e-6);
    }
}
