//! Property tests for the operator-level invariants, plus a green run of
//! every named validation suite.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use dc_moreau::convex;
use dc_moreau::diagnostics::{run_suite, SuiteName};
use dc_moreau::metric::{MetricMatrix, SmoothingParams};
use dc_moreau::prox::{envelope_value, prox, ProxRequest};
use dc_moreau::smoothing::SmoothedObjective;

fn v1(x: f64) -> DVector<f64> {
    DVector::from_element(1, x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_norm_stays_inside_equivalence_band(
        d in 0.6f64..1.9,
        x in -10.0f64..10.0,
    ) {
        let m = 2.0;
        let metric = MetricMatrix::scalar(d, m).unwrap();
        let v = v1(x);
        let n = metric.norm_sq(&v).unwrap();
        prop_assert!(n >= v.norm_squared() / m - 1e-10);
        prop_assert!(n <= m * v.norm_squared() + 1e-10);
        prop_assert_eq!(n, metric.norm_sq(&(-&v)).unwrap());
    }

    #[test]
    fn envelope_never_exceeds_the_function(
        lambda in 0.005f64..0.5,
        d in 0.6f64..1.9,
        x in -3.0f64..3.0,
    ) {
        let metric = MetricMatrix::scalar(d, 2.0).unwrap();
        for func in [convex::abs(), convex::abs_cubed()] {
            let env = envelope_value(&func, lambda, &metric, &v1(x)).unwrap();
            prop_assert!(env <= func.eval(&v1(x)).unwrap() + 1e-10);
        }
    }

    #[test]
    fn cubed_prox_is_odd(
        lambda in 0.005f64..0.5,
        d in 0.6f64..1.9,
        x in 0.0f64..3.0,
    ) {
        let metric = MetricMatrix::scalar(d, 2.0).unwrap();
        let g = convex::abs_cubed();
        let plus = prox(&ProxRequest::new(&g, lambda, &metric, &v1(x))).unwrap();
        let minus = prox(&ProxRequest::new(&g, lambda, &metric, &v1(-x))).unwrap();
        prop_assert_eq!(plus.point[0], -minus.point[0]);
    }

    #[test]
    fn firm_optimality_of_the_prox_point(
        lambda in 0.01f64..0.5,
        x in -3.0f64..3.0,
        probe in -3.0f64..3.0,
    ) {
        // (Dx - Dw)/lambda is a subgradient at the prox point w
        let metric = MetricMatrix::scalar(1.5, 2.0).unwrap();
        for func in [convex::abs(), convex::abs_cubed()] {
            let r = prox(&ProxRequest::new(&func, lambda, &metric, &v1(x))).unwrap();
            let residual = metric.apply(&(v1(x) - &r.point)) / lambda;
            let lhs = func.eval(&v1(probe)).unwrap();
            let rhs = func.eval(&r.point).unwrap()
                + residual.dot(&(v1(probe) - &r.point));
            prop_assert!(lhs >= rhs - 1e-8);
        }
    }

    #[test]
    fn smoothed_value_inside_sandwich(
        x in -3.0f64..3.0,
        mu in 0.005f64..0.05,
        ratio in 1.0f64..4.0,
    ) {
        // m = 1 metrics: admissible whenever lambda >= mu
        let lambda = mu * ratio;
        let params = SmoothingParams::scalar(lambda, mu, 1.0, 1.0, 1.0).unwrap();
        let obj = SmoothedObjective::new(convex::abs_cubed_minus_abs(), params).unwrap();
        let v = obj.value(&v1(x)).unwrap();
        let (lo, hi) = obj.sandwich_bounds(&v1(x)).unwrap();
        prop_assert!(lo <= v + 1e-9);
        prop_assert!(v <= hi + 1e-9);
    }

    #[test]
    fn quadratic_prox_satisfies_normal_equations(
        lambda in 0.05f64..1.0,
        x0 in -2.0f64..2.0,
        x1 in -2.0f64..2.0,
    ) {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.0, 0.8]);
        let b = DVector::from_vec(vec![0.3, -0.7]);
        let q = convex::quadratic(a.clone(), b.clone()).unwrap();
        let metric = MetricMatrix::certify(
            DMatrix::from_row_slice(2, 2, &[1.2, 0.1, 0.1, 0.9]),
            2.0,
        ).unwrap();
        let x = DVector::from_vec(vec![x0, x1]);
        let r = prox(&ProxRequest::new(&q, lambda, &metric, &x)).unwrap();
        let lhs = (metric.entries() + a.transpose() * &a * lambda) * &r.point;
        let rhs = metric.apply(&x) + a.transpose() * &b * lambda;
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }
}

#[test]
fn all_validation_suites_pass_on_the_benchmark() {
    for name in SuiteName::ALL {
        let report = run_suite(name, 42).expect("suite runs");
        assert!(
            report.all_passed(),
            "suite {} failed:\n{report}",
            name.as_str()
        );
    }
}

#[test]
fn suite_reports_have_stable_shape() {
    let report = run_suite(SuiteName::Prox, 7).unwrap();
    assert!(report.properties.len() >= 5);
    let text = report.to_string();
    assert!(text.contains("firm_optimality"));
    assert!(text.ends_with("result: PASS"));
}
