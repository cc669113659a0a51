//! The two first-order schemes on the smoothed objective: plain gradient
//! descent (step `gamma/L`, `0 < gamma < 2`) and the inertial variant that
//! evaluates the gradient at an extrapolated point
//! `w_n = x_n + theta_n (x_n - x_{n-1})` while stepping from `x_n`.
//!
//! Every run carries monitors that re-check the per-step descent
//! inequalities the schemes are supposed to satisfy. Monitors record slack
//! and flip a flag on violation; they never abort or perturb the iteration.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::smoothing::SmoothedObjective;

/// Absolute slack granted to every monitored inequality.
pub const MONITOR_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Gd,
    Inertial,
}

impl Algo {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::Gd => "gd",
            Algo::Inertial => "inertial",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Algo::Gd),
            "inertial" => Ok(Algo::Inertial),
            other => Err(Error::AdmissibilityViolation(format!(
                "unknown algorithm `{other}` (expected `gd` or `inertial`)"
            ))),
        }
    }
}

/// Extrapolation weight policy for the inertial scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaPolicy {
    /// `theta_n = 2 (1 - gamma) L gamma_n / (gamma (2 Q + 3 L))`, the largest
    /// weight under which the step-recursion bound below still telescopes.
    MaxAdmissible,
    /// A fixed weight, validated against the same bound.
    Constant(f64),
    /// No extrapolation; reduces the scheme to plain gradient descent.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopMode {
    /// Stop when `|x_{n+1} - x_n| <= tol`.
    StepNorm,
    /// Stop when `|y_n - z_n| <= tol * L / gamma` (proportional to the step
    /// through the update, so the two modes stop at the same iterate).
    GradGapNorm,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub algo: Algo,
    pub gamma: f64,
    /// Constant value of the schedule `gamma_n` in (0,1); inertial only.
    pub gamma_n: f64,
    pub theta_policy: ThetaPolicy,
    pub tol: f64,
    pub max_iter: usize,
    pub stop_mode: StopMode,
    /// Keep every k-th trace row (the final row is always kept).
    pub trace_thinning: usize,
}

impl SolverConfig {
    pub fn gd(gamma: f64) -> Self {
        Self {
            algo: Algo::Gd,
            gamma,
            gamma_n: 0.99,
            theta_policy: ThetaPolicy::Zero,
            tol: 1e-4,
            max_iter: 1_000_000,
            stop_mode: StopMode::StepNorm,
            trace_thinning: 1,
        }
    }

    pub fn inertial(gamma: f64) -> Self {
        Self {
            algo: Algo::Inertial,
            theta_policy: ThetaPolicy::MaxAdmissible,
            ..Self::gd(gamma)
        }
    }
}

/// `2 (1 - gamma) L gamma_n / (gamma (2 Q + 3 L))`: the largest admissible
/// extrapolation weight for gradient-Lipschitz constant `L` and quadratic
/// form bound `Q`.
pub fn theta_bound(gamma: f64, gamma_n: f64, lipschitz: f64, quadform: f64) -> f64 {
    2.0 * (1.0 - gamma) * lipschitz * gamma_n / (gamma * (2.0 * quadform + 3.0 * lipschitz))
}

/// Admissible step-scale interval for an algorithm on a given objective.
#[derive(Debug, Clone, Copy)]
pub struct GammaRange {
    pub lo: f64,
    pub hi: f64,
    /// Whether `lo` itself is admissible.
    pub lo_closed: bool,
}

impl GammaRange {
    pub fn contains(&self, gamma: f64) -> bool {
        let above = if self.lo_closed {
            gamma >= self.lo
        } else {
            gamma > self.lo
        };
        above && gamma < self.hi
    }
}

/// `(0, 2)` for plain descent; `[2L/(5L + 2Q), 1)` for the inertial scheme.
pub fn admissible_gamma_range(obj: &SmoothedObjective, algo: Algo) -> GammaRange {
    match algo {
        Algo::Gd => GammaRange {
            lo: 0.0,
            hi: 2.0,
            lo_closed: false,
        },
        Algo::Inertial => {
            let l = obj.grad_lipschitz();
            let q = obj.grad_quadform_bound();
            GammaRange {
                lo: 2.0 * l / (5.0 * l + 2.0 * q),
                hi: 1.0,
                lo_closed: true,
            }
        }
    }
}

/// One executed iteration. The update is exactly
/// `x_next = x - (gamma / L)(y - z)` with `y`, `z` the envelope gradients at
/// `w` (`w = x` for plain descent).
#[derive(Debug, Clone)]
pub struct IterateRecord {
    pub n: u64,
    pub x: DVector<f64>,
    pub w: DVector<f64>,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
    pub phi_smooth: f64,
    pub phi_orig: f64,
    pub step_norm: f64,
    pub grad_gap_norm: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    /// A prox evaluation failed mid-run; the result carries the trace up to
    /// the failure.
    InnerFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::InnerFailure => "inner_failure",
        }
    }
}

/// Summary of the inequality monitors of one run. Slacks are signed
/// (`measured - bound`); negative means the inequality held with margin.
#[derive(Debug, Clone)]
pub struct MonitorSummary {
    pub algo: Algo,
    pub sandwich_admissible: bool,
    /// Plain descent: max of `Phi_s(x_{n+1}) - Phi_s(x_n)`.
    pub monotone_max_slack: f64,
    pub monotone_violations: u64,
    /// Plain descent: slack of the sufficient-decrease inequality
    /// `Phi_s(x_{n+1}) <= Phi_s(x_n) + (L/2 - L/gamma)|dx|^2`.
    pub sufficient_decrease_max_slack: f64,
    /// Plain descent, at termination: slack of
    /// `min_k |y_k - z_k|^2 <= 2L (Phi_0 - Phi_best) / (gamma (2 - gamma) N)`.
    pub residual_bound_slack: f64,
    /// Coercivity floor check `phi(|x_n|) + beta <= Phi_s(x_0)`; `None`
    /// without a witness.
    pub coercivity_ok: Option<bool>,
    /// Inertial: slack of the extrapolation descent inequality
    /// `Phi_s(x_{n+1}) <= Phi_s(x_n) + (L th/2 - L/g + L/2)|dx_{n+1}|^2
    ///  + (Q th^2 + L th^2 + L th/2)|dx_n|^2`.
    pub extrapolation_max_slack: f64,
    /// Inertial: slack of the step recursion
    /// `|dx_{n+1}|^2 <= gamma_n |dx_n|^2 + g/(L(1-g)) (Phi_s(x_n) - Phi_s(x_{n+1}))`.
    pub recursion_max_slack: f64,
    /// Accumulated `sum |x_{n+1} - x_n|^2` (finite for admissible runs).
    pub step_sq_sum: f64,
    /// Message of an inner-solver failure, when one ended the run.
    pub inner_error: Option<String>,
}

impl MonitorSummary {
    fn new(algo: Algo, sandwich_admissible: bool) -> Self {
        Self {
            algo,
            sandwich_admissible,
            monotone_max_slack: f64::NEG_INFINITY,
            monotone_violations: 0,
            sufficient_decrease_max_slack: f64::NEG_INFINITY,
            residual_bound_slack: f64::NEG_INFINITY,
            coercivity_ok: None,
            extrapolation_max_slack: f64::NEG_INFINITY,
            recursion_max_slack: f64::NEG_INFINITY,
            step_sq_sum: 0.0,
            inner_error: None,
        }
    }

    /// All monitored inequalities held within [`MONITOR_SLACK`].
    pub fn all_ok(&self) -> bool {
        self.monotone_max_slack <= MONITOR_SLACK
            && self.sufficient_decrease_max_slack <= MONITOR_SLACK
            && self.residual_bound_slack <= MONITOR_SLACK
            && self.extrapolation_max_slack <= MONITOR_SLACK
            && self.recursion_max_slack <= MONITOR_SLACK
            && self.coercivity_ok.unwrap_or(true)
            && self.inner_error.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub status: SolveStatus,
    pub final_x: DVector<f64>,
    pub iterations: usize,
    pub trace: Vec<IterateRecord>,
    pub monitors: MonitorSummary,
    /// Smoothed objective value at the final iterate.
    pub final_phi_smooth: f64,
}

fn validate_common(cfg: &SolverConfig) -> Result<()> {
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::AdmissibilityViolation(format!(
            "tol must be > 0, got {}",
            cfg.tol
        )));
    }
    if cfg.max_iter == 0 {
        return Err(Error::AdmissibilityViolation(
            "max_iter must be >= 1".into(),
        ));
    }
    if cfg.trace_thinning == 0 {
        return Err(Error::AdmissibilityViolation(
            "trace_thinning must be >= 1".into(),
        ));
    }
    Ok(())
}

fn validate_gd(cfg: &SolverConfig) -> Result<()> {
    validate_common(cfg)?;
    if !(cfg.gamma > 0.0 && cfg.gamma < 2.0) {
        return Err(Error::AdmissibilityViolation(format!(
            "gd requires gamma in (0, 2), got {}",
            cfg.gamma
        )));
    }
    Ok(())
}

fn validate_inertial(cfg: &SolverConfig, obj: &SmoothedObjective) -> Result<()> {
    validate_common(cfg)?;
    let range = admissible_gamma_range(obj, Algo::Inertial);
    if !range.contains(cfg.gamma) {
        return Err(Error::AdmissibilityViolation(format!(
            "inertial requires gamma in [{:.6}, 1), got {}",
            range.lo, cfg.gamma
        )));
    }
    if !(cfg.gamma_n > 0.0 && cfg.gamma_n < 1.0) {
        return Err(Error::AdmissibilityViolation(format!(
            "gamma_n must lie in (0, 1), got {}",
            cfg.gamma_n
        )));
    }
    if let ThetaPolicy::Constant(c) = cfg.theta_policy {
        let bound = theta_bound(
            cfg.gamma,
            cfg.gamma_n,
            obj.grad_lipschitz(),
            obj.grad_quadform_bound(),
        );
        if !(c > 0.0 && c <= bound) {
            return Err(Error::AdmissibilityViolation(format!(
                "constant theta {c} outside (0, {bound:.6}]"
            )));
        }
    }
    Ok(())
}

/// Plain gradient descent from `x0`.
pub fn run_gd(
    obj: &SmoothedObjective,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
) -> Result<SolverResult> {
    if cfg.algo != Algo::Gd {
        return Err(Error::AdmissibilityViolation(
            "run_gd requires cfg.algo = gd".into(),
        ));
    }
    validate_gd(cfg)?;
    solve_loop(obj, cfg, x0, x0, ThetaPolicy::Zero)
}

/// Inertial scheme from the pair `(x0, x1)`; pass `x1 = x0` for zero initial
/// momentum.
pub fn run_inertial(
    obj: &SmoothedObjective,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
    x1: &DVector<f64>,
) -> Result<SolverResult> {
    if cfg.algo != Algo::Inertial {
        return Err(Error::AdmissibilityViolation(
            "run_inertial requires cfg.algo = inertial".into(),
        ));
    }
    validate_inertial(cfg, obj)?;
    solve_loop(obj, cfg, x0, x1, cfg.theta_policy)
}

fn solve_loop(
    obj: &SmoothedObjective,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
    x1: &DVector<f64>,
    theta_policy: ThetaPolicy,
) -> Result<SolverResult> {
    if x0.len() != obj.problem().dim() || x1.len() != obj.problem().dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.problem().dim(),
            got: x0.len().max(x1.len()),
        });
    }
    let lipschitz = obj.grad_lipschitz();
    let quadform = obj.grad_quadform_bound();
    let gamma = cfg.gamma;
    let step_scale = gamma / lipschitz;
    let theta_value = match theta_policy {
        ThetaPolicy::MaxAdmissible => theta_bound(gamma, cfg.gamma_n, lipschitz, quadform),
        ThetaPolicy::Constant(c) => c,
        ThetaPolicy::Zero => 0.0,
    };
    let grad_gap_tol = cfg.tol * lipschitz / gamma;

    let mut monitors = MonitorSummary::new(cfg.algo, obj.params().sandwich_admissible());
    let mut x_prev = x0.clone();
    let mut x = x1.clone();
    let mut phi_x = obj.value(&x)?;
    let phi_start = phi_x;
    let mut phi_best = phi_x;
    let mut min_grad_gap_sq = f64::INFINITY;
    let mut trace: Vec<IterateRecord> = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut iterations = cfg.max_iter;

    for n in 0..cfg.max_iter {
        let w = if theta_value == 0.0 {
            x.clone()
        } else {
            &x + (&x - &x_prev) * theta_value
        };
        let at_w = match obj.eval_at(&w) {
            Ok(p) => p,
            Err(e @ Error::InnerSolverDiverged { .. }) | Err(e @ Error::MissingOracles { .. }) => {
                monitors.inner_error = Some(e.to_string());
                return Ok(SolverResult {
                    status: SolveStatus::InnerFailure,
                    final_x: x.clone(),
                    iterations: n,
                    trace,
                    monitors,
                    final_phi_smooth: phi_x,
                });
            }
            Err(e) => return Err(e),
        };
        let gap = &at_w.grad_g - &at_w.grad_f;
        let x_next = &x - &gap * step_scale;
        let step_norm = (&x_next - &x).norm();
        let grad_gap_norm = gap.norm();
        min_grad_gap_sq = min_grad_gap_sq.min(grad_gap_norm * grad_gap_norm);

        let phi_next = obj.value(&x_next)?;
        let step_sq = step_norm * step_norm;
        let prev_step_sq = (&x - &x_prev).norm_squared();
        monitors.step_sq_sum += step_sq;

        match cfg.algo {
            Algo::Gd => {
                let decrease = phi_next - phi_x;
                monitors.monotone_max_slack = monitors.monotone_max_slack.max(decrease);
                if decrease > MONITOR_SLACK {
                    monitors.monotone_violations += 1;
                }
                let bound = (lipschitz / 2.0 - lipschitz / gamma) * step_sq;
                monitors.sufficient_decrease_max_slack =
                    monitors.sufficient_decrease_max_slack.max(decrease - bound);
                if let Some(witness) = obj.problem().coercivity() {
                    let floor = witness.lower_bound(x.norm());
                    let ok = floor <= phi_start + MONITOR_SLACK;
                    monitors.coercivity_ok = Some(monitors.coercivity_ok.unwrap_or(true) && ok);
                }
            }
            Algo::Inertial => {
                let th = theta_value;
                let rhs = (lipschitz * th / 2.0 - lipschitz / gamma + lipschitz / 2.0) * step_sq
                    + (quadform * th * th + lipschitz * th * th + lipschitz * th / 2.0)
                        * prev_step_sq;
                monitors.extrapolation_max_slack =
                    monitors.extrapolation_max_slack.max(phi_next - phi_x - rhs);
                let recursion_rhs = cfg.gamma_n * prev_step_sq
                    + gamma / (lipschitz * (1.0 - gamma)) * (phi_x - phi_next);
                monitors.recursion_max_slack =
                    monitors.recursion_max_slack.max(step_sq - recursion_rhs);
            }
        }

        let stop = match cfg.stop_mode {
            StopMode::StepNorm => step_norm <= cfg.tol,
            StopMode::GradGapNorm => grad_gap_norm <= grad_gap_tol,
        };

        if n % cfg.trace_thinning == 0 || stop || n + 1 == cfg.max_iter {
            trace.push(IterateRecord {
                n: n as u64,
                x: x.clone(),
                w,
                y: at_w.grad_g.clone(),
                z: at_w.grad_f.clone(),
                phi_smooth: phi_x,
                phi_orig: obj.problem().value(&x)?,
                step_norm,
                grad_gap_norm,
                theta: theta_value,
            });
        }

        x_prev = x;
        x = x_next;
        phi_x = phi_next;
        phi_best = phi_best.min(phi_x);

        if stop {
            status = SolveStatus::Converged;
            iterations = n + 1;
            break;
        }
    }

    if cfg.algo == Algo::Gd {
        // terminal residual-rate check against the best observed value
        let n_steps = iterations.max(1) as f64;
        let bound = 2.0 * lipschitz * (phi_start - phi_best) / (gamma * (2.0 - gamma) * n_steps);
        monitors.residual_bound_slack = min_grad_gap_sq - bound;
    }

    Ok(SolverResult {
        status,
        final_x: x,
        iterations,
        trace,
        monitors,
        final_phi_smooth: phi_x,
    })
}
