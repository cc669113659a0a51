//! The smoothed objective `Phi_s(x) = g_env(x) - f_env(x)` built from the two
//! metric envelopes, its gradient, two-sided value bounds, and the
//! approximate-stationarity diagnostics evaluated at candidate limit points.

use nalgebra::DVector;

use crate::convex::{ConvexFunction, DCProblem};
use crate::error::{Error, Result};
use crate::metric::{MetricMatrix, SmoothingParams};
use crate::prox::{prox, ProxRequest, ProxResult};

/// A DC problem together with its smoothing configuration and the cached
/// gradient constants.
#[derive(Debug, Clone)]
pub struct SmoothedObjective {
    problem: DCProblem,
    params: SmoothingParams,
    grad_lipschitz: f64,
    grad_quadform_bound: f64,
}

/// Everything the envelopes know about one query point: both prox results
/// and both envelope gradients.
#[derive(Debug, Clone)]
pub struct SmoothedPoint {
    pub prox_g: ProxResult,
    pub prox_f: ProxResult,
    /// `D1 (x - prox_g(x)) / lambda`, the gradient of the g-envelope.
    pub grad_g: DVector<f64>,
    /// `D2 (x - prox_f(x)) / mu`, the gradient of the f-envelope.
    pub grad_f: DVector<f64>,
}

impl SmoothedPoint {
    pub fn value(&self) -> f64 {
        self.prox_g.envelope_value - self.prox_f.envelope_value
    }

    pub fn gradient(&self) -> DVector<f64> {
        &self.grad_g - &self.grad_f
    }
}

impl SmoothedObjective {
    pub fn new(problem: DCProblem, params: SmoothingParams) -> Result<Self> {
        if problem.dim() != params.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim(),
                got: params.dim(),
            });
        }
        let grad_lipschitz = params.grad_lipschitz();
        let grad_quadform_bound = params.grad_quadform_bound();
        Ok(Self {
            problem,
            params,
            grad_lipschitz,
            grad_quadform_bound,
        })
    }

    pub fn problem(&self) -> &DCProblem {
        &self.problem
    }

    pub fn params(&self) -> &SmoothingParams {
        &self.params
    }

    pub fn grad_lipschitz(&self) -> f64 {
        self.grad_lipschitz
    }

    pub fn grad_quadform_bound(&self) -> f64 {
        self.grad_quadform_bound
    }

    /// Evaluates both envelopes at `x`.
    pub fn eval_at(&self, x: &DVector<f64>) -> Result<SmoothedPoint> {
        let p = &self.params;
        let prox_g = prox(&ProxRequest::new(self.problem.g(), p.lambda(), p.d1(), x))?;
        let prox_f = prox(&ProxRequest::new(self.problem.f(), p.mu(), p.d2(), x))?;
        let grad_g = p.d1().apply(&(x - &prox_g.point)) / p.lambda();
        let grad_f = p.d2().apply(&(x - &prox_f.point)) / p.mu();
        Ok(SmoothedPoint {
            prox_g,
            prox_f,
            grad_g,
            grad_f,
        })
    }

    /// `Phi_s(x)`: difference of the two envelope values.
    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.eval_at(x)?.value())
    }

    /// `grad Phi_s(x) = D2(prox_f(x) - x)/mu - D1(prox_g(x) - x)/lambda`.
    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.eval_at(x)?.gradient())
    }

    /// Two-sided bounds on `Phi_s(x)` in terms of the original objective at
    /// the two prox points. Requires `lambda >= m^2 mu`.
    pub fn sandwich_bounds(&self, x: &DVector<f64>) -> Result<(f64, f64)> {
        let p = &self.params;
        if !p.sandwich_admissible() {
            return Err(Error::NotAdmissible {
                lambda: p.lambda(),
                threshold: p.m() * p.m() * p.mu(),
            });
        }
        let at = self.eval_at(x)?;
        let m = p.m();
        let dist_g = (&at.prox_g.point - x).norm_squared();
        let dist_f = (&at.prox_f.point - x).norm_squared();
        let lower = self.problem.value(&at.prox_g.point)?
            + (1.0 / (2.0 * m * p.lambda()) - m / (2.0 * p.mu())) * dist_g;
        let upper = self.problem.value(&at.prox_f.point)?
            + (m / (2.0 * p.lambda()) - 1.0 / (2.0 * m * p.mu())) * dist_f;
        Ok((lower, upper))
    }
}

/// The anchored metric value `func(z) - func(x) + |z - x|^2_D / (2 param)`.
///
/// Its minimizer over `z` is the metric prox of `x`, and its value gap from
/// that minimizer defines epsilon-approximation below.
pub fn metric_function(
    func: &ConvexFunction,
    param: f64,
    metric: &MetricMatrix,
    z: &DVector<f64>,
    x: &DVector<f64>,
) -> Result<f64> {
    if z.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: z.len(),
        });
    }
    let quad = metric.norm_sq(&(z - x))? / (2.0 * param);
    Ok(func.eval(z)? - func.eval(x)? + quad)
}

/// True iff the anchored metric values of `zbar` and `z` differ by at most
/// `eps`. When `z` is (numerically) the prox of `x`, the strong convexity of
/// the anchored function pins `zbar` inside a `sqrt(2 m param eps)` ball; the
/// radius is re-checked here as a debug assertion.
#[allow(clippy::too_many_arguments)]
pub fn is_epsilon_approximation(
    func: &ConvexFunction,
    param: f64,
    metric: &MetricMatrix,
    m: f64,
    z: &DVector<f64>,
    zbar: &DVector<f64>,
    x: &DVector<f64>,
    eps: f64,
) -> Result<bool> {
    let vz = metric_function(func, param, metric, z, x)?;
    let vzbar = metric_function(func, param, metric, zbar, x)?;
    let close = (vzbar - vz).abs() <= eps;
    if close {
        let at_prox = prox(&ProxRequest::new(func, param, metric, x))?;
        if (z - &at_prox.point).norm() <= 1e-8 * (1.0 + x.norm()) {
            let radius_sq = 2.0 * m * param * eps + 1e-10;
            debug_assert!(
                (zbar - z).norm_squared() <= radius_sq,
                "epsilon-approximation of the prox escaped its certified ball"
            );
        }
    }
    Ok(close)
}

/// Approximate-stationarity scalars at a candidate limit point.
#[derive(Debug, Clone)]
pub struct StationarityReport {
    /// `|prox_g(x) - prox_f(x)|`.
    pub prox_gap_norm: f64,
    /// `Phi(prox_f(x)) - Phi(prox_g(x))`.
    pub phi_gap: f64,
    /// `|(lambda D1^-1 - mu D2^-1) y|` with `y = D1(x - prox_g(x))/lambda`.
    pub operator_residual_norm: f64,
    /// Spectral norm of `lambda D1^-1 - mu D2^-1`, the scalar controlling
    /// how near the two smoothing operators are.
    pub metric_mismatch_norm: f64,
    /// `Phi_s(prox_g(x)) - Phi(prox_g(x))` through the anchored-metric
    /// identity: `f(prox_g x) - f(prox_f x) - |prox_f x - prox_g x|^2_D2 / (2 mu)`.
    pub smoothing_gap: f64,
    /// Norm of the smoothed gradient at `x` itself.
    pub grad_norm: f64,
}

/// Evaluates the stationarity diagnostics at `x`. Report-only: no pass/fail.
pub fn stationarity_report(
    obj: &SmoothedObjective,
    x: &DVector<f64>,
) -> Result<StationarityReport> {
    let p = obj.params();
    let at = obj.eval_at(x)?;
    let pg = &at.prox_g.point;
    let pf = &at.prox_f.point;
    let prox_gap_norm = (pg - pf).norm();
    let phi_gap = obj.problem().value(pf)? - obj.problem().value(pg)?;
    let mismatch = p.d1().inverse() * p.lambda() - p.d2().inverse() * p.mu();
    let operator_residual_norm = (&mismatch * &at.grad_g).norm();
    let metric_mismatch_norm = {
        let sym = (&mismatch + mismatch.transpose()) * 0.5;
        sym.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |a, &e| a.max(e.abs()))
    };
    let smoothing_gap = obj.problem().f().eval(pg)?
        - obj.problem().f().eval(pf)?
        - p.d2().norm_sq(&(pf - pg))? / (2.0 * p.mu());
    let grad_norm = at.gradient().norm();
    Ok(StationarityReport {
        prox_gap_norm,
        phi_gap,
        operator_residual_norm,
        metric_mismatch_norm,
        smoothing_gap,
        grad_norm,
    })
}
