//! End-to-end tests of the `dcme` binary: exit codes, file outputs,
//! determinism of CSVs, and the zero-extrapolation reduction.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dcme(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcme"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

const BENCH_SOLVE: &str = r#"
[problem]
g = "abs_cubed"
f = "abs"
dim = 1

[problem.coercivity]
scale = 0.5
power = 3.0
beta = -0.6666666666666666

[smoothing]
lambda = 0.01
mu = 0.01
d1 = [[1.0]]
d2 = [[1.0]]
m = 1.0

[solver]
algo = "gd"
gamma = 1.8

[run]
x0 = [1.0]
"#;

#[test]
fn solve_converges_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), BENCH_SOLVE).unwrap();
    let out = dcme(&["solve", "--config", "run.toml"], dir.path());
    assert!(out.status.success(), "{:?}", out);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("status=converged"));
    assert!(stdout.contains("monitors_ok=true"));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("n,x,phi_smooth,phi_orig,step_norm,grad_gap_norm,theta_n\n"));
    assert!(trace.lines().count() > 100);
}

#[test]
fn solve_rejects_gamma_out_of_range_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = BENCH_SOLVE.replace("gamma = 1.8", "gamma = 2.5");
    fs::write(dir.path().join("run.toml"), bad).unwrap();
    let out = dcme(&["solve", "--config", "run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("(0, 2)"), "stderr: {stderr}");
}

#[test]
fn solve_exit_2_on_max_iter() {
    let dir = tempfile::tempdir().unwrap();
    let capped = BENCH_SOLVE.replace("gamma = 1.8", "gamma = 1.8\nmax_iter = 3");
    fs::write(dir.path().join("run.toml"), capped).unwrap();
    let out = dcme(&["solve", "--config", "run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_theta_inertial_trace_matches_gd() {
    let dir = tempfile::tempdir().unwrap();
    let gd = BENCH_SOLVE.replace("gamma = 1.8", "gamma = 0.9");
    fs::write(dir.path().join("gd.toml"), &gd).unwrap();
    let inertial = gd
        .replace("algo = \"gd\"", "algo = \"inertial\"")
        .replace("gamma = 0.9", "gamma = 0.9\ntheta = \"zero\"");
    fs::write(dir.path().join("inertial.toml"), inertial).unwrap();

    let a = dcme(&["solve", "--config", "gd.toml", "--out", "a"], dir.path());
    let b = dcme(
        &["solve", "--config", "inertial.toml", "--out", "b"],
        dir.path(),
    );
    assert!(a.status.success() && b.status.success());
    let ta = fs::read(dir.path().join("a/trace.csv")).unwrap();
    let tb = fs::read(dir.path().join("b/trace.csv")).unwrap();
    assert_eq!(ta, tb, "traces differ between gd and zero-theta inertial");
}

#[test]
fn reproduce_table1_emits_all_rows_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dcme(&["reproduce", "--table", "1", "--out", "rep"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("rep/table1_comparison.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 17); // header + 16 rows
    assert_eq!(
        lines[0],
        "row,reported_phi,our_phi,abs_diff,reported_iters,our_iters"
    );
    for line in &lines[1..] {
        let abs_diff: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(abs_diff <= 5e-3, "row out of tolerance: {line}");
    }
}

const SWEEP: &str = r#"
[problem]
g = "abs_cubed"
f = "abs"
dim = 1

[smoothing]
d1 = [[1.0]]
d2 = [[1.0]]
m = 1.0

[solver]
algo = "gd"
gamma = 1.8
tol = 1e-6

[run]
x0 = [1.0]

[sweep]
lambdas = [0.02, 0.015, 0.011, 0.0101]
mus = [0.01]
"#;

#[test]
fn sweep_is_deterministic_and_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sweep.toml"), SWEEP).unwrap();
    let one = dcme(
        &["sweep", "--config", "sweep.toml", "--out", "w1"],
        dir.path(),
    );
    let many = dcme(
        &[
            "sweep",
            "--config",
            "sweep.toml",
            "--out",
            "w3",
            "--workers",
            "3",
        ],
        dir.path(),
    );
    assert!(one.status.success() && many.status.success());
    let a = fs::read(dir.path().join("w1/sweep.csv")).unwrap();
    let b = fs::read(dir.path().join("w3/sweep.csv")).unwrap();
    assert_eq!(a, b, "worker count changed sweep bytes");

    // the prox-value gap column shrinks as lambda approaches mu
    let text = String::from_utf8(a).unwrap();
    let gaps: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(8).unwrap().parse::<f64>().unwrap().abs())
        .collect();
    assert_eq!(gaps.len(), 4);
    assert!(gaps.windows(2).all(|p| p[1] <= p[0]), "gaps: {gaps:?}");
}

#[test]
fn sweep_empty_grid_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let empty = SWEEP.replace("lambdas = [0.02, 0.015, 0.011, 0.0101]", "lambdas = []");
    fs::write(dir.path().join("sweep.toml"), empty).unwrap();
    let out = dcme(&["sweep", "--config", "sweep.toml"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn validate_exit_codes_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let ok = dcme(
        &["validate", "--suite", "gradient", "--seed", "42"],
        dir.path(),
    );
    assert_eq!(ok.status.code(), Some(0));
    let again = dcme(
        &["validate", "--suite", "gradient", "--seed", "42"],
        dir.path(),
    );
    assert_eq!(ok.stdout, again.stdout, "validate output not reproducible");

    let bogus = dcme(&["validate", "--suite", "bogus"], dir.path());
    assert_eq!(bogus.status.code(), Some(1));
}

const QUAD_L1: &str = r#"
[problem]
g = "quadratic"
f = "l1"
dim = 3
a = [[1.2, 0.3, 0.0], [0.3, 0.9, 0.1], [0.0, 0.1, 1.1]]
b = [0.4, -0.2, 0.9]

[smoothing]
lambda = 0.05
mu = 0.02
d1 = [[1.5, 0.0, 0.0], [0.0, 0.8, 0.0], [0.0, 0.0, 1.2]]
d2 = [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]]
m = 2.0

[solver]
algo = "gd"
gamma = 1.5

[run]
x0 = [1.0, -1.0, 0.5]
"#;

#[test]
fn solve_handles_matrix_valued_problems() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), QUAD_L1).unwrap();
    let out = dcme(&["solve", "--config", "run.toml"], dir.path());
    assert!(out.status.success(), "{:?}", out);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("status=converged"));
    // x column carries 3 semicolon-joined coordinates
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let first = trace.lines().nth(1).unwrap();
    let x_col = first.split(',').nth(1).unwrap();
    assert_eq!(x_col.split(';').count(), 3);
}

#[test]
fn box_as_subtracted_component_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = QUAD_L1.replace("f = \"l1\"", "f = \"box\"").replace(
        "b = [0.4, -0.2, 0.9]",
        "b = [0.4, -0.2, 0.9]\nlo = [0.0, 0.0, 0.0]\nhi = [1.0, 1.0, 1.0]",
    );
    fs::write(dir.path().join("run.toml"), bad).unwrap();
    let out = dcme(&["solve", "--config", "run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("restricted domain"), "stderr: {stderr}");
}
