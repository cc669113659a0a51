//! Minimization of differences of convex functions `Phi = g - f` by
//! smoothing each component with its own metric Moreau envelope.
//!
//! Each component is replaced by
//! `g_env(x) = inf_w { g(w) + (1/2 lambda) |w - x|^2_D1 }` (and likewise for
//! `f` with `mu`, `D2`), where the metrics are symmetric positive definite
//! with eigenvalues certified inside `[1/m, m]`. The difference of envelopes
//! is differentiable with an explicitly bounded gradient, so two first-order
//! schemes apply: plain gradient descent and an inertial variant that
//! extrapolates before evaluating the gradient. Both come with per-step
//! monitors that re-check the descent inequalities the schemes guarantee,
//! plus stationarity diagnostics for the points they converge to.
//!
//! Module map:
//! - [`metric`]: certified SPD metrics and the smoothing constants.
//! - [`convex`]: function oracles and the built-in catalog.
//! - [`prox`]: the metric proximal operator and envelope values.
//! - [`smoothing`]: the smoothed objective, its gradient and value bounds.
//! - [`solver`]: the two schemes with inequality monitors.
//! - [`diagnostics`]: grid/finite-difference oracles and validation suites.
//! - [`baselines`]: bundled reference tables and the sweep runner.
//! - [`csv`]: pinned-format CSV emission.

pub mod baselines;
pub mod convex;
pub mod csv;
pub mod diagnostics;
pub mod error;
pub mod metric;
pub mod prox;
pub mod smoothing;
pub mod solver;

pub use convex::{ConvexFunction, DCProblem};
pub use error::{Error, Result};
pub use metric::{MetricMatrix, SmoothingParams};
pub use prox::{ProxRequest, ProxResult};
pub use smoothing::SmoothedObjective;
pub use solver::{Algo, SolveStatus, SolverConfig, SolverResult};
