//! TOML run configuration and its mapping onto library types.
//!
//! ```toml
//! [problem]
//! g = "abs_cubed"          # abs | abs_cubed | quadratic | l1 | box
//! f = "abs"
//! dim = 1
//!
//! [problem.coercivity]     # optional witness phi(t) = scale * t^power
//! scale = 0.5
//! power = 3.0
//! beta = -0.6666666666666666
//!
//! [smoothing]
//! lambda = 0.01            # optional when [sweep] provides a grid
//! mu = 0.01
//! d1 = [[1.0]]             # row-major dense matrices
//! d2 = [[1.0]]
//! m = 1.0
//!
//! [solver]
//! algo = "gd"              # gd | inertial
//! gamma = 1.8
//! theta = "max_admissible" # inertial: max_admissible | zero | a number
//!
//! [run]
//! x0 = [1.0]
//!
//! [sweep]                  # only read by the sweep command
//! lambdas = [0.02, 0.015]
//! mus = [0.01]
//! ```

use anyhow::{bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use dc_moreau::baselines::SweepSpec;
use dc_moreau::convex::{self, CoercivityWitness, ConvexFunction, DCProblem};
use dc_moreau::metric::{MetricMatrix, SmoothingParams};
use dc_moreau::smoothing::SmoothedObjective;
use dc_moreau::solver::{Algo, SolverConfig, StopMode, ThetaPolicy};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: ProblemSection,
    pub smoothing: SmoothingSection,
    pub solver: SolverSection,
    pub run: RunSection,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub g: String,
    pub f: String,
    pub dim: usize,
    /// Least-squares data, required when g or f is "quadratic".
    pub a: Option<Vec<Vec<f64>>>,
    pub b: Option<Vec<f64>>,
    /// Box bounds, required when g or f is "box".
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub coercivity: Option<CoercivitySection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoercivitySection {
    pub scale: f64,
    pub power: f64,
    pub beta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingSection {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub d1: Vec<Vec<f64>>,
    pub d2: Vec<Vec<f64>>,
    pub m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub algo: String,
    pub gamma: f64,
    pub gamma_n: Option<f64>,
    pub theta: Option<toml::Value>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub stop_mode: Option<String>,
    pub trace_thinning: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub x0: Vec<f64>,
    pub x1: Option<Vec<f64>>,
    pub output_path: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
}

pub fn parse(text: &str) -> Result<FileConfig> {
    Ok(toml::from_str(text)?)
}

fn dense(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        bail!("{what}: empty matrix");
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        bail!("{what}: ragged rows");
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

fn catalog(section: &ProblemSection, name: &str) -> Result<ConvexFunction> {
    let dim = section.dim;
    Ok(match name {
        "abs" => {
            if dim != 1 {
                bail!("catalog `abs` is 1-D");
            }
            convex::abs()
        }
        "abs_cubed" => {
            if dim != 1 {
                bail!("catalog `abs_cubed` is 1-D");
            }
            convex::abs_cubed()
        }
        "l1" => convex::l1(dim),
        "quadratic" => {
            let a = dense(
                section.a.as_ref().context("quadratic requires problem.a")?,
                "problem.a",
            )?;
            let b = DVector::from_vec(section.b.clone().context("quadratic requires problem.b")?);
            if a.ncols() != dim {
                bail!("problem.a must have dim = {dim} columns");
            }
            convex::quadratic(a, b)?
        }
        "box" => {
            let lo = DVector::from_vec(section.lo.clone().context("box requires problem.lo")?);
            let hi = DVector::from_vec(section.hi.clone().context("box requires problem.hi")?);
            if lo.len() != dim {
                bail!("problem.lo must have length dim = {dim}");
            }
            convex::box_indicator(lo, hi)?
        }
        other => bail!("unknown catalog function `{other}`"),
    })
}

pub fn build_problem(section: &ProblemSection) -> Result<DCProblem> {
    let g = catalog(section, &section.g)?;
    let f = catalog(section, &section.f)?;
    if section.f == "box" {
        // the subtracted component must be finite wherever g is
        bail!("problem.f = \"box\" has a restricted domain; use it as g only");
    }
    let mut problem = DCProblem::new(g, f)?;
    if let Some(c) = &section.coercivity {
        problem = problem.with_coercivity(CoercivityWitness::power(c.scale, c.power, c.beta));
    }
    Ok(problem)
}

pub fn build_metrics(section: &SmoothingSection) -> Result<(MetricMatrix, MetricMatrix)> {
    let d1 = MetricMatrix::certify(dense(&section.d1, "smoothing.d1")?, section.m)?;
    let d2 = MetricMatrix::certify(dense(&section.d2, "smoothing.d2")?, section.m)?;
    Ok((d1, d2))
}

pub fn build_params(section: &SmoothingSection) -> Result<SmoothingParams> {
    let lambda = section.lambda.context("smoothing.lambda is required")?;
    let mu = section.mu.context("smoothing.mu is required")?;
    let (d1, d2) = build_metrics(section)?;
    Ok(SmoothingParams::new(lambda, mu, d1, d2, section.m)?)
}

pub fn build_solver(section: &SolverSection) -> Result<SolverConfig> {
    let algo: Algo = section.algo.parse()?;
    let mut cfg = match algo {
        Algo::Gd => SolverConfig::gd(section.gamma),
        Algo::Inertial => SolverConfig::inertial(section.gamma),
    };
    if let Some(gn) = section.gamma_n {
        cfg.gamma_n = gn;
    }
    if let Some(theta) = &section.theta {
        cfg.theta_policy = match theta {
            toml::Value::String(s) if s == "max_admissible" => ThetaPolicy::MaxAdmissible,
            toml::Value::String(s) if s == "zero" => ThetaPolicy::Zero,
            toml::Value::Float(c) => ThetaPolicy::Constant(*c),
            toml::Value::Integer(c) => ThetaPolicy::Constant(*c as f64),
            other => {
                bail!("solver.theta must be `max_admissible`, `zero` or a number, got {other}")
            }
        };
    }
    if let Some(t) = section.tol {
        cfg.tol = t;
    }
    if let Some(mi) = section.max_iter {
        cfg.max_iter = mi;
    }
    if let Some(mode) = &section.stop_mode {
        cfg.stop_mode = match mode.as_str() {
            "step_norm" => StopMode::StepNorm,
            "grad_gap_norm" => StopMode::GradGapNorm,
            other => bail!("unknown stop_mode `{other}`"),
        };
    }
    if let Some(thin) = section.trace_thinning {
        cfg.trace_thinning = thin;
    }
    Ok(cfg)
}

pub struct BuiltRun {
    pub objective: SmoothedObjective,
    pub cfg: SolverConfig,
    pub x0: DVector<f64>,
    pub x1: DVector<f64>,
    pub output_path: Option<String>,
}

pub fn build_run(config: &FileConfig) -> Result<BuiltRun> {
    let problem = build_problem(&config.problem)?;
    let params = build_params(&config.smoothing)?;
    let objective = SmoothedObjective::new(problem, params)?;
    let cfg = build_solver(&config.solver)?;
    let x0 = DVector::from_vec(config.run.x0.clone());
    let x1 = DVector::from_vec(
        config
            .run
            .x1
            .clone()
            .unwrap_or_else(|| config.run.x0.clone()),
    );
    Ok(BuiltRun {
        objective,
        cfg,
        x0,
        x1,
        output_path: config.run.output_path.clone(),
    })
}

pub fn build_sweep(config: &FileConfig) -> Result<SweepSpec> {
    let sweep = config.sweep.as_ref().context("missing [sweep] section")?;
    let problem = build_problem(&config.problem)?;
    let (d1, d2) = build_metrics(&config.smoothing)?;
    let cfg = build_solver(&config.solver)?;
    let x0 = DVector::from_vec(config.run.x0.clone());
    let x1 = DVector::from_vec(
        config
            .run
            .x1
            .clone()
            .unwrap_or_else(|| config.run.x0.clone()),
    );
    Ok(SweepSpec {
        problem,
        lambdas: sweep.lambdas.clone(),
        mus: sweep.mus.clone(),
        d1,
        d2,
        m: config.smoothing.m,
        cfg,
        x0,
        x1,
    })
}
