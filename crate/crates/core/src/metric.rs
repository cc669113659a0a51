//! Certified symmetric positive definite metric matrices and the smoothing
//! constants derived from them.
//!
//! A metric matrix `D` with bound `m >= 1` has all eigenvalues inside
//! `[1/m, m]`, which gives the two-sided norm equivalence
//! `(1/m)|x|^2 <= x^T D x <= m|x|^2`. Both smoothing metrics share a single
//! bound `m`, and every Lipschitz-type constant below is expressed through
//! that shared bound rather than the (possibly tighter) actual spectrum.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Componentwise symmetry tolerance applied before certification.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Slack allowed on the certified eigenvalue interval, relative to `m`.
const EIG_SLACK: f64 = 1e-9;

/// A symmetric positive definite matrix certified to have eigenvalues in
/// `[1/m, m]`, together with the certificate itself.
#[derive(Debug, Clone)]
pub struct MetricMatrix {
    dim: usize,
    entries: DMatrix<f64>,
    bound_m: f64,
    eig_min: f64,
    eig_max: f64,
}

impl MetricMatrix {
    /// Certifies `entries` against the eigenvalue bound `m`.
    ///
    /// The matrix must be symmetric within [`SYMMETRY_TOL`] componentwise; it
    /// is then symmetrized (averaged with its transpose) and its full
    /// spectrum computed. Rejects matrices with an eigenvalue outside
    /// `[1/m, m]` or not strictly positive.
    pub fn certify(entries: DMatrix<f64>, m: f64) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        if !m.is_finite() || m < 1.0 {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
                constraint: "must be finite and >= 1",
            });
        }
        let dim = entries.nrows();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let deviation = (entries[(i, j)] - entries[(j, i)]).abs();
                if deviation > SYMMETRY_TOL {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        deviation,
                    });
                }
            }
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        let eigenvalues = sym.clone().symmetric_eigen().eigenvalues;
        let eig_min = eigenvalues.min();
        let eig_max = eigenvalues.max();
        if eig_min <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                eigenvalue: eig_min,
            });
        }
        let slack = EIG_SLACK * m.max(1.0);
        let (lo, hi) = (1.0 / m, m);
        if eig_min < lo - slack {
            return Err(Error::EigenvalueOutOfRange {
                eigenvalue: eig_min,
                lo,
                hi,
            });
        }
        if eig_max > hi + slack {
            return Err(Error::EigenvalueOutOfRange {
                eigenvalue: eig_max,
                lo,
                hi,
            });
        }
        Ok(Self {
            dim,
            entries: sym,
            bound_m: m,
            eig_min,
            eig_max,
        })
    }

    /// Identity metric in dimension `dim`, certified with the tight bound 1.
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: DMatrix::identity(dim, dim),
            bound_m: 1.0,
            eig_min: 1.0,
            eig_max: 1.0,
        }
    }

    /// 1x1 metric `[d]` certified against `m`.
    pub fn scalar(d: f64, m: f64) -> Result<Self> {
        Self::certify(DMatrix::from_element(1, 1, d), m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bound(&self) -> f64 {
        self.bound_m
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Certified eigenvalue range.
    pub fn eig_range(&self) -> (f64, f64) {
        (self.eig_min, self.eig_max)
    }

    /// `D x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.entries * x
    }

    /// Squared metric norm `x^T D x`.
    pub fn norm_sq(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(x.dot(&self.apply(x)))
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.entries
            .clone()
            .try_inverse()
            .expect("certified SPD matrix is invertible")
    }

    pub fn is_diagonal(&self) -> bool {
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j && self.entries[(i, j)] != 0.0 {
                    return false;
                }
            }
        }
        true
    }

    /// The diagonal, when the matrix is diagonal.
    pub fn diagonal(&self) -> Option<DVector<f64>> {
        self.is_diagonal().then(|| self.entries.diagonal())
    }
}

/// The full smoothing configuration: two regularization weights and two
/// metrics under one shared eigenvalue bound.
#[derive(Debug, Clone)]
pub struct SmoothingParams {
    lambda: f64,
    mu: f64,
    d1: MetricMatrix,
    d2: MetricMatrix,
    m: f64,
}

impl SmoothingParams {
    pub fn new(lambda: f64, mu: f64, d1: MetricMatrix, d2: MetricMatrix, m: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                constraint: "must be finite and > 0",
            });
        }
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: mu,
                constraint: "must be finite and > 0",
            });
        }
        if m.is_nan() || m < 1.0 {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
                constraint: "must be >= 1",
            });
        }
        if d1.bound() > m || d2.bound() > m {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
                constraint: "must dominate the certified bounds of both metrics",
            });
        }
        if d1.dim() != d2.dim() {
            return Err(Error::DimensionMismatch {
                expected: d1.dim(),
                got: d2.dim(),
            });
        }
        Ok(Self {
            lambda,
            mu,
            d1,
            d2,
            m,
        })
    }

    /// Scalar 1-D configuration with metrics `[d1]`, `[d2]`.
    pub fn scalar(lambda: f64, mu: f64, d1: f64, d2: f64, m: f64) -> Result<Self> {
        Self::new(
            lambda,
            mu,
            MetricMatrix::scalar(d1, m)?,
            MetricMatrix::scalar(d2, m)?,
            m,
        )
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn d1(&self) -> &MetricMatrix {
        &self.d1
    }

    pub fn d2(&self) -> &MetricMatrix {
        &self.d2
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.d1.dim()
    }

    /// Whether `lambda >= m^2 mu`, the precondition for the two-sided value
    /// bounds (and for the smoothed infimum dominating the original one).
    pub fn sandwich_admissible(&self) -> bool {
        self.lambda >= self.m * self.m * self.mu
    }

    /// Lipschitz constant of the smoothed gradient:
    /// `(1/lambda + 1/mu)(m + m^3)`.
    pub fn grad_lipschitz(&self) -> f64 {
        (1.0 / self.lambda + 1.0 / self.mu) * (self.m + self.m.powi(3))
    }

    /// Bound on `|<grad(x) - grad(y), x - y>| / |x - y|^2` for the smoothed
    /// objective, the larger of the two one-sided quadratic-form estimates.
    pub fn grad_quadform_bound(&self) -> f64 {
        let (l, u, m) = (self.lambda, self.mu, self.m);
        let lower = (-m.powi(4) * u + u - l * m * m) / (l * u * m);
        let upper = (l * m.powi(4) + u * m * m - l) / (l * u * m);
        lower.abs().max(upper.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn certifies_identity_with_tight_bound() {
        let d = MetricMatrix::certify(DMatrix::identity(1, 1), 1.0).unwrap();
        assert_eq!(d.bound(), 1.0);
        assert_eq!(d.dim(), 1);
    }

    #[test]
    fn scalar_two_inside_bound_two() {
        let d = MetricMatrix::scalar(2.0, 2.0).unwrap();
        let (lo, hi) = d.eig_range();
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_three_rejected_by_bound_two() {
        match MetricMatrix::scalar(3.0, 2.0) {
            Err(Error::EigenvalueOutOfRange { eigenvalue, .. }) => {
                assert!((eigenvalue - 3.0).abs() < 1e-12)
            }
            other => panic!("expected EigenvalueOutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_and_indefinite_rejected() {
        let a = dmatrix![1.0, 0.5; 0.2, 1.0];
        assert!(matches!(
            MetricMatrix::certify(a, 2.0),
            Err(Error::NotSymmetric { .. })
        ));
        let b = dmatrix![1.0, 0.0; 0.0, -0.5];
        assert!(matches!(
            MetricMatrix::certify(b, 2.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn norm_sq_examples() {
        let d = MetricMatrix::scalar(2.0, 2.0).unwrap();
        assert_eq!(d.norm_sq(&DVector::zeros(1)).unwrap(), 0.0);
        assert_eq!(d.norm_sq(&DVector::from_element(1, 1.0)).unwrap(), 2.0);

        let id = MetricMatrix::identity(4);
        let x = DVector::from_vec(vec![0.3, -1.7, 2.2, 0.9]);
        assert_eq!(id.norm_sq(&x).unwrap(), x.norm_squared());
        assert!(matches!(
            id.norm_sq(&DVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn norm_equivalence_holds_for_certified_matrices() {
        // Rotate a diagonal with eigenvalues inside [1/m, m].
        let m = 3.0;
        let q = nalgebra::Rotation2::new(0.7).into_inner();
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![0.4, 2.5]));
        let a = q * diag * q.transpose();
        let d = MetricMatrix::certify(DMatrix::from_column_slice(2, 2, a.as_slice()), m).unwrap();
        for k in 0..32 {
            let x = DVector::from_vec(vec![(k as f64 * 0.37).sin(), (k as f64 * 0.61).cos()]);
            let n = d.norm_sq(&x).unwrap();
            assert!(n >= x.norm_squared() / m - 1e-10);
            assert!(n <= m * x.norm_squared() + 1e-10);
            assert_eq!(n, d.norm_sq(&(-&x)).unwrap());
        }
    }

    #[test]
    fn grad_lipschitz_examples() {
        let p = SmoothingParams::scalar(0.01, 0.01, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.grad_lipschitz(), 400.0);
        let p = SmoothingParams::scalar(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.grad_lipschitz(), 4.0);
        let p = SmoothingParams::scalar(0.04, 0.01, 2.0, 2.0, 2.0).unwrap();
        assert!((p.grad_lipschitz() - 1250.0).abs() < 1e-9);
    }

    #[test]
    fn grad_quadform_examples() {
        let p = SmoothingParams::scalar(0.01, 0.01, 1.0, 1.0, 1.0).unwrap();
        assert!((p.grad_quadform_bound() - 100.0).abs() < 1e-9);
        let p = SmoothingParams::scalar(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((p.grad_quadform_bound() - 1.0).abs() < 1e-12);
        // Both branches evaluated with exact rationals: max(387.5, 800) = 800.
        let p = SmoothingParams::scalar(0.04, 0.01, 2.0, 2.0, 2.0).unwrap();
        assert!((p.grad_quadform_bound() - 800.0).abs() < 1e-9);
    }

    #[test]
    fn constants_decrease_in_lambda_and_mu() {
        let base = SmoothingParams::scalar(0.02, 0.01, 1.5, 2.0, 2.0).unwrap();
        for (dl, du) in [(1.5, 1.0), (1.0, 2.0), (3.0, 1.5)] {
            let wider = SmoothingParams::scalar(0.02 * dl, 0.01 * du, 1.5, 2.0, 2.0).unwrap();
            if dl > 1.0 || du > 1.0 {
                assert!(wider.grad_lipschitz() < base.grad_lipschitz());
            }
        }
    }

    #[test]
    fn sandwich_admissibility_flag() {
        let p = SmoothingParams::scalar(0.04, 0.01, 1.5, 2.0, 2.0).unwrap();
        assert!(p.sandwich_admissible()); // lambda = m^2 mu exactly
        let p = SmoothingParams::scalar(0.039, 0.01, 1.5, 2.0, 2.0).unwrap();
        assert!(!p.sandwich_admissible());
    }
}
