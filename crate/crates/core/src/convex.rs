//! Convex function oracles and the difference-of-convex problem they form.
//!
//! A [`ConvexFunction`] bundles an evaluation oracle with two optional
//! oracles: a deterministic subgradient selection and an analytic metric
//! prox. The analytic prox returns `Ok(None)` when it has no formula for the
//! requested metric (e.g. the l1 prox under a non-diagonal metric), in which
//! case the engine falls back to an iterative inner solver.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::metric::MetricMatrix;

type EvalFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type SubgradFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type ProxFn =
    Arc<dyn Fn(f64, &MetricMatrix, &DVector<f64>) -> Result<Option<DVector<f64>>> + Send + Sync>;

/// A proper convex function given through oracles. Immutable and cheap to
/// clone; all oracles are pure.
#[derive(Clone)]
pub struct ConvexFunction {
    name: String,
    dim: usize,
    eval: EvalFn,
    subgrad: Option<SubgradFn>,
    analytic_prox: Option<ProxFn>,
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("subgrad", &self.subgrad.is_some())
            .field("analytic_prox", &self.analytic_prox.is_some())
            .finish()
    }
}

impl ConvexFunction {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            subgrad: None,
            analytic_prox: None,
        }
    }

    pub fn with_subgrad(
        mut self,
        subgrad: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        self.subgrad = Some(Arc::new(subgrad));
        self
    }

    pub fn with_analytic_prox(
        mut self,
        prox: impl Fn(f64, &MetricMatrix, &DVector<f64>) -> Result<Option<DVector<f64>>>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        self.analytic_prox = Some(Arc::new(prox));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_subgrad(&self) -> bool {
        self.subgrad.is_some()
    }

    pub fn has_analytic_prox(&self) -> bool {
        self.analytic_prox.is_some()
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok((self.eval)(x))
    }

    /// One deterministic element of the subdifferential at `x`.
    pub fn subgrad(&self, x: &DVector<f64>) -> Result<Option<DVector<f64>>> {
        self.check_dim(x)?;
        Ok(self.subgrad.as_ref().map(|s| s(x)))
    }

    /// Attempts the analytic metric prox; `Ok(None)` when no formula covers
    /// this `(lambda, metric)` combination.
    pub fn try_analytic_prox(
        &self,
        lambda: f64,
        metric: &MetricMatrix,
        x: &DVector<f64>,
    ) -> Result<Option<DVector<f64>>> {
        self.check_dim(x)?;
        if metric.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: metric.dim(),
            });
        }
        match &self.analytic_prox {
            Some(p) => p(lambda, metric, x),
            None => Ok(None),
        }
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Worst violation of midpoint convexity over random pairs in the box
    /// `[lo, hi]^dim`. Validation-mode check; never run in solver paths.
    pub fn convexity_slack(&self, rng: &mut impl Rng, samples: usize, lo: f64, hi: f64) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let x = random_point(rng, self.dim, lo, hi);
            let y = random_point(rng, self.dim, lo, hi);
            let t: f64 = rng.random_range(0.05..0.95);
            let mid = &x * t + &y * (1.0 - t);
            let lhs = (self.eval)(&mid);
            let rhs = t * (self.eval)(&x) + (1.0 - t) * (self.eval)(&y);
            worst = worst.max(lhs - rhs);
        }
        worst
    }

    /// Worst violation of the subgradient inequality over random pairs.
    pub fn subgradient_slack(&self, rng: &mut impl Rng, samples: usize, lo: f64, hi: f64) -> f64 {
        let Some(sub) = &self.subgrad else {
            return f64::NEG_INFINITY;
        };
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let x = random_point(rng, self.dim, lo, hi);
            let y = random_point(rng, self.dim, lo, hi);
            let s = sub(&x);
            let lower = (self.eval)(&x) + s.dot(&(&y - &x));
            worst = worst.max(lower - (self.eval)(&y));
        }
        worst
    }
}

fn random_point(rng: &mut impl Rng, dim: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.random_range(lo..hi))
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    f64::copysign((x.abs() - t).max(0.0), x)
}

/// 1-D absolute value. Its metric prox under a scalar metric `[d]` is the
/// soft threshold with radius `lambda/d`.
pub fn abs() -> ConvexFunction {
    ConvexFunction::new("abs", 1, |x: &DVector<f64>| x[0].abs())
        .with_subgrad(|x: &DVector<f64>| {
            // 0 is chosen at the kink for reproducibility.
            DVector::from_element(1, sign(x[0]))
        })
        .with_analytic_prox(|lambda, metric, x| {
            let d = metric.entries()[(0, 0)];
            Ok(Some(DVector::from_element(
                1,
                soft_threshold(x[0], lambda / d),
            )))
        })
}

/// 1-D cubed absolute value `|w|^3`. For `x >= 0` the prox under a scalar
/// metric `[d]` is the positive root of `3 lambda w^2 + d w - d x = 0`,
/// extended oddly to `x < 0`.
pub fn abs_cubed() -> ConvexFunction {
    ConvexFunction::new("abs_cubed", 1, |x: &DVector<f64>| x[0].abs().powi(3))
        .with_subgrad(|x: &DVector<f64>| DVector::from_element(1, 3.0 * x[0] * x[0].abs()))
        .with_analytic_prox(|lambda, metric, x| {
            let d = metric.entries()[(0, 0)];
            let a = x[0].abs();
            let w = (-d + (d * d + 12.0 * lambda * d * a).sqrt()) / (6.0 * lambda);
            Ok(Some(DVector::from_element(1, f64::copysign(w, x[0]))))
        })
}

/// Least-squares term `0.5 |A w - b|^2`. The prox solves the SPD system
/// `(D + lambda A^T A) w = D x + lambda A^T b`.
pub fn quadratic(a: DMatrix<f64>, b: DVector<f64>) -> Result<ConvexFunction> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let dim = a.ncols();
    let (ae, be) = (a.clone(), b.clone());
    let (ag, bg) = (a.clone(), b.clone());
    Ok(
        ConvexFunction::new("quadratic", dim, move |x: &DVector<f64>| {
            0.5 * (&ae * x - &be).norm_squared()
        })
        .with_subgrad(move |x: &DVector<f64>| ag.transpose() * (&ag * x - &bg))
        .with_analytic_prox(move |lambda, metric, x| {
            let system = metric.entries() + a.transpose() * &a * lambda;
            let rhs = metric.apply(x) + a.transpose() * &b * lambda;
            match Cholesky::new(system) {
                Some(chol) => Ok(Some(chol.solve(&rhs))),
                None => Err(Error::SingularSystem),
            }
        }),
    )
}

/// n-D l1 norm. Prox available in closed form only for diagonal metrics
/// (componentwise soft threshold with radii `lambda/d_i`).
pub fn l1(dim: usize) -> ConvexFunction {
    ConvexFunction::new("l1", dim, |x: &DVector<f64>| {
        x.iter().map(|v| v.abs()).sum()
    })
    .with_subgrad(|x: &DVector<f64>| x.map(sign))
    .with_analytic_prox(|lambda, metric, x| {
        let Some(diag) = metric.diagonal() else {
            return Ok(None);
        };
        Ok(Some(DVector::from_fn(x.len(), |i, _| {
            soft_threshold(x[i], lambda / diag[i])
        })))
    })
}

/// Indicator of the box `[lo, hi]`. Prox under a diagonal metric is the
/// componentwise clamp; there is no subgradient oracle (the normal cone is
/// not representable by a single selection).
pub fn box_indicator(lo: DVector<f64>, hi: DVector<f64>) -> Result<ConvexFunction> {
    if lo.len() != hi.len() {
        return Err(Error::DimensionMismatch {
            expected: lo.len(),
            got: hi.len(),
        });
    }
    if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
        return Err(Error::InvalidParameter {
            name: "box",
            value: f64::NAN,
            constraint: "lo <= hi componentwise",
        });
    }
    let dim = lo.len();
    let (le, he) = (lo.clone(), hi.clone());
    Ok(ConvexFunction::new("box", dim, move |x: &DVector<f64>| {
        let inside = x
            .iter()
            .zip(le.iter().zip(he.iter()))
            .all(|(v, (l, h))| *v >= *l && *v <= *h);
        if inside {
            0.0
        } else {
            f64::INFINITY
        }
    })
    .with_analytic_prox(move |_lambda, metric, x| {
        if !metric.is_diagonal() {
            return Ok(None);
        }
        Ok(Some(DVector::from_fn(dim, |i, _| x[i].clamp(lo[i], hi[i]))))
    }))
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Coercivity witness `phi(|x|) + beta <= Phi(x)` with `phi` nondecreasing
/// and `phi(0) = 0`.
#[derive(Clone)]
pub struct CoercivityWitness {
    phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    beta: f64,
}

impl CoercivityWitness {
    pub fn new(phi: impl Fn(f64) -> f64 + Send + Sync + 'static, beta: f64) -> Self {
        Self {
            phi: Arc::new(phi),
            beta,
        }
    }

    /// Power-law witness `scale * t^power`.
    pub fn power(scale: f64, power: f64, beta: f64) -> Self {
        Self::new(move |t| scale * t.powf(power), beta)
    }

    pub fn lower_bound(&self, radius: f64) -> f64 {
        (self.phi)(radius) + self.beta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl fmt::Debug for CoercivityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoercivityWitness")
            .field("beta", &self.beta)
            .finish()
    }
}

/// The difference-of-convex problem `Phi = g - f`.
#[derive(Clone, Debug)]
pub struct DCProblem {
    g: ConvexFunction,
    f: ConvexFunction,
    dim: usize,
    coercivity: Option<CoercivityWitness>,
}

impl DCProblem {
    pub fn new(g: ConvexFunction, f: ConvexFunction) -> Result<Self> {
        if g.dim() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: g.dim(),
                got: f.dim(),
            });
        }
        let dim = g.dim();
        Ok(Self {
            g,
            f,
            dim,
            coercivity: None,
        })
    }

    pub fn with_coercivity(mut self, witness: CoercivityWitness) -> Self {
        self.coercivity = Some(witness);
        self
    }

    pub fn g(&self) -> &ConvexFunction {
        &self.g
    }

    pub fn f(&self) -> &ConvexFunction {
        &self.f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coercivity(&self) -> Option<&CoercivityWitness> {
        self.coercivity.as_ref()
    }

    /// `Phi(x) = g(x) - f(x)`.
    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.g.eval(x)? - self.f.eval(x)?)
    }

    /// Worst violation of the coercivity lower bound over random samples;
    /// `NEG_INFINITY` when no witness is attached.
    pub fn coercivity_slack(&self, rng: &mut impl Rng, samples: usize, lo: f64, hi: f64) -> f64 {
        let Some(w) = &self.coercivity else {
            return f64::NEG_INFINITY;
        };
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let x = random_point(rng, self.dim, lo, hi);
            let bound = w.lower_bound(x.norm());
            if let Ok(v) = self.value(&x) {
                worst = worst.max(bound - v)
            }
        }
        worst
    }
}

/// The 1-D benchmark problem `|x|^3 - |x|`, with its coercivity witness
/// `|x|^3 / 2 - 2/3`.
pub fn abs_cubed_minus_abs() -> DCProblem {
    DCProblem::new(abs_cubed(), abs())
        .expect("matching dims")
        .with_coercivity(CoercivityWitness::power(0.5, 3.0, -2.0 / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v1(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn value_examples() {
        let p = abs_cubed_minus_abs();
        let x = 1.0 / 3.0_f64.sqrt();
        let v = p.value(&v1(x)).unwrap();
        assert!((v - (-0.384_900_179_459_750_5)).abs() < 1e-12);
        assert_eq!(p.value(&v1(0.0)).unwrap(), 0.0);

        let same = DCProblem::new(abs(), abs()).unwrap();
        for x in [-2.3, 0.0, 0.7] {
            assert_eq!(same.value(&v1(x)).unwrap(), 0.0);
        }
    }

    #[test]
    fn abs_prox_is_soft_threshold() {
        let f = abs();
        let d = MetricMatrix::identity(1);
        let w = f.try_analytic_prox(0.1, &d, &v1(1.0)).unwrap().unwrap();
        assert!((w[0] - 0.9).abs() < 1e-15);
        assert_eq!(
            f.try_analytic_prox(0.1, &d, &v1(0.0)).unwrap().unwrap()[0],
            0.0
        );
        assert_eq!(
            f.try_analytic_prox(0.1, &d, &v1(0.05)).unwrap().unwrap()[0],
            0.0
        );
    }

    #[test]
    fn abs_cubed_prox_examples() {
        let g = abs_cubed();
        let d = MetricMatrix::identity(1);
        let w = g.try_analytic_prox(0.01, &d, &v1(1.0)).unwrap().unwrap();
        assert!((w[0] - 0.971_675_407_097_272_2).abs() < 1e-12);
        assert_eq!(
            g.try_analytic_prox(0.01, &d, &v1(0.0)).unwrap().unwrap()[0],
            0.0
        );
        let wn = g.try_analytic_prox(0.01, &d, &v1(-1.0)).unwrap().unwrap();
        assert_eq!(wn[0], -w[0]); // odd symmetry, bitwise
    }

    #[test]
    fn quadratic_prox_shrinks_identity_instance() {
        let q = quadratic(DMatrix::identity(3, 3), DVector::zeros(3)).unwrap();
        let d = MetricMatrix::identity(3);
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let w = q.try_analytic_prox(0.25, &d, &x).unwrap().unwrap();
        for i in 0..3 {
            assert!((w[i] - x[i] / 1.25).abs() < 1e-14);
        }

        let zero = quadratic(DMatrix::zeros(3, 3), DVector::zeros(3)).unwrap();
        let w = zero.try_analytic_prox(0.25, &d, &x).unwrap().unwrap();
        assert_eq!(w, x); // constant g leaves the point fixed
    }

    #[test]
    fn l1_prox_componentwise() {
        let f = l1(2);
        let d = MetricMatrix::identity(2);
        let w = f
            .try_analytic_prox(0.1, &d, &DVector::from_vec(vec![1.0, -0.05]))
            .unwrap()
            .unwrap();
        assert!((w[0] - 0.9).abs() < 1e-15);
        assert_eq!(w[1], 0.0);

        let full = MetricMatrix::certify(nalgebra::dmatrix![1.0, 0.2; 0.2, 1.0], 2.0).unwrap();
        assert!(f
            .try_analytic_prox(0.1, &full, &DVector::zeros(2))
            .unwrap()
            .is_none());
    }

    #[test]
    fn box_prox_clamps() {
        let b = box_indicator(DVector::zeros(2), DVector::from_element(2, 1.0)).unwrap();
        let d = MetricMatrix::identity(2);
        let w = b
            .try_analytic_prox(0.7, &d, &DVector::from_vec(vec![2.0, -1.0]))
            .unwrap()
            .unwrap();
        assert_eq!(w, DVector::from_vec(vec![1.0, 0.0]));
        let interior = DVector::from_vec(vec![0.25, 0.75]);
        assert_eq!(
            b.try_analytic_prox(0.7, &d, &interior).unwrap().unwrap(),
            interior
        );
    }

    #[test]
    fn oracle_probes_accept_catalog() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in [abs(), abs_cubed(), l1(3)] {
            assert!(f.convexity_slack(&mut rng, 200, -3.0, 3.0) <= 1e-9);
            assert!(f.subgradient_slack(&mut rng, 200, -3.0, 3.0) <= 1e-9);
        }
        let p = abs_cubed_minus_abs();
        assert!(p.coercivity_slack(&mut rng, 200, -3.0, 3.0) <= 1e-9);
    }
}
