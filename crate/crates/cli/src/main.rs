//! `dcme`: batch driver for DC minimization via metric Moreau-envelope
//! smoothing. Verbs: solve one configured run, reproduce a bundled baseline
//! table, sweep a parameter grid, or run a named validation suite.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use dc_moreau::baselines::{reproduce_table, SweepCell, TableId};
use dc_moreau::csv::{
    fmt_float, fmt_vector, write_comparison, write_suite, write_sweep, write_trace,
};
use dc_moreau::diagnostics::{run_suite, SuiteName};
use dc_moreau::solver::SolveStatus;

#[derive(Parser)]
#[command(
    name = "dcme",
    version,
    about = "DC minimization via metric Moreau-envelope smoothing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured solve and write its trace CSV.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: alongside the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun a bundled baseline table and write the comparison CSV.
    Reproduce {
        #[arg(long)]
        table: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve every cell of the configured (lambda, mu) grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Concurrent cell workers.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Run a named validation suite and print its report.
    Validate {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also write the report as CSV into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve { config, out } => cmd_solve(&config, out.as_deref()),
        Command::Reproduce { table, out } => cmd_reproduce(&table, &out),
        Command::Sweep {
            config,
            out,
            workers,
        } => cmd_sweep(&config, out.as_deref(), workers),
        Command::Validate { suite, seed, out } => cmd_validate(&suite, seed, out.as_deref()),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn read_config(path: &Path) -> Result<config::FileConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    config::parse(&text).with_context(|| format!("cannot parse config {}", path.display()))
}

fn cmd_solve(config_path: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let file = read_config(config_path)?;
    let run = config::build_run(&file)?;
    let started = Instant::now();
    let result = dc_moreau::baselines::run_configured(&run.objective, &run.cfg, &run.x0, &run.x1)?;
    let wall = started.elapsed().as_secs_f64();

    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| config_path.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)?;
    let trace_path = match &run.output_path {
        Some(p) => out_dir.join(p),
        None => out_dir.join("trace.csv"),
    };
    let mut file_out = fs::File::create(&trace_path)
        .with_context(|| format!("cannot create {}", trace_path.display()))?;
    write_trace(&mut file_out, &result.trace)?;

    let phi = run.objective.problem().value(&result.final_x)?;
    println!(
        "status={} final_x={} phi={} phi_smooth={} iterations={} monitors_ok={} wall_time_s={:.6} trace={}",
        result.status.as_str(),
        fmt_vector(&result.final_x),
        fmt_float(phi),
        fmt_float(result.final_phi_smooth),
        result.iterations,
        result.monitors.all_ok(),
        wall,
        trace_path.display(),
    );
    Ok(match result.status {
        SolveStatus::Converged => ExitCode::SUCCESS,
        SolveStatus::MaxIter => ExitCode::from(2),
        SolveStatus::InnerFailure => ExitCode::from(1),
    })
}

fn cmd_reproduce(table: &str, out: &Path) -> Result<ExitCode> {
    let id: TableId = table.parse()?;
    let rows = reproduce_table(id)?;
    fs::create_dir_all(out)?;
    let path = out.join(format!("table{}_comparison.csv", table));
    let mut file = fs::File::create(&path)?;
    write_comparison(&mut file, &rows)?;
    let max_diff = rows.iter().map(|r| r.abs_diff).fold(0.0_f64, f64::max);
    println!(
        "table={} rows={} max_abs_diff={} csv={}",
        table,
        rows.len(),
        fmt_float(max_diff),
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(config_path: &Path, out: Option<&Path>, workers: usize) -> Result<ExitCode> {
    let file = read_config(config_path)?;
    let spec = config::build_sweep(&file)?;
    let total = spec.len();

    let cells: Vec<SweepCell> = if workers <= 1 || total <= 1 {
        spec.run_all()?
    } else {
        // cells own their outputs; merge happens by index below
        let next = AtomicUsize::new(0);
        let collected: Mutex<Vec<Option<SweepCell>>> = Mutex::new(vec![None; total]);
        let errors: Mutex<Vec<dc_moreau::Error>> = Mutex::new(Vec::new());
        std::thread::scope(|scope| {
            for _ in 0..workers.min(total) {
                scope.spawn(|| loop {
                    let index = next.fetch_add(1, Ordering::Relaxed);
                    if index >= total {
                        break;
                    }
                    match spec.run_cell(index) {
                        Ok(cell) => collected.lock().unwrap()[index] = Some(cell),
                        Err(e) => errors.lock().unwrap().push(e),
                    }
                });
            }
        });
        if let Some(e) = errors.into_inner().unwrap().into_iter().next() {
            return Err(e.into());
        }
        collected
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|c| c.expect("all cells solved"))
            .collect()
    };

    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| config_path.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)?;
    let path = out_dir.join("sweep.csv");
    let mut file_out = fs::File::create(&path)?;
    write_sweep(&mut file_out, &cells)?;
    println!("cells={} csv={}", cells.len(), path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(suite: &str, seed: u64, out: Option<&Path>) -> Result<ExitCode> {
    let name: SuiteName = suite.parse()?;
    let report = run_suite(name, seed)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{report}")?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("suite_{}.csv", name.as_str()));
        let mut file = fs::File::create(&path)?;
        write_suite(&mut file, &report)?;
    }
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
