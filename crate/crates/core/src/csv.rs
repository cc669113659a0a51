//! CSV emission with a pinned format: header row, decimal floats printed
//! with 17 significant digits, LF line endings, UTF-8. Vector-valued columns
//! join coordinates with `;`.

use std::io::{self, Write};

use nalgebra::DVector;

use crate::baselines::{ComparisonRow, SweepCell};
use crate::diagnostics::SuiteReport;
use crate::solver::IterateRecord;

/// 17 significant digits: enough for exact f64 round-trips.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_vector(v: &DVector<f64>) -> String {
    v.iter()
        .map(|c| fmt_float(*c))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_trace<W: Write>(out: &mut W, trace: &[IterateRecord]) -> io::Result<()> {
    writeln!(
        out,
        "n,x,phi_smooth,phi_orig,step_norm,grad_gap_norm,theta_n"
    )?;
    for row in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.n,
            fmt_vector(&row.x),
            fmt_float(row.phi_smooth),
            fmt_float(row.phi_orig),
            fmt_float(row.step_norm),
            fmt_float(row.grad_gap_norm),
            fmt_float(row.theta),
        )?;
    }
    Ok(())
}

pub fn write_comparison<W: Write>(out: &mut W, rows: &[ComparisonRow]) -> io::Result<()> {
    writeln!(
        out,
        "row,reported_phi,our_phi,abs_diff,reported_iters,our_iters"
    )?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.id,
            fmt_float(row.reported_phi),
            fmt_float(row.our_phi),
            fmt_float(row.abs_diff),
            row.reported_iters,
            row.our_iters,
        )?;
    }
    Ok(())
}

pub fn write_sweep<W: Write>(out: &mut W, cells: &[SweepCell]) -> io::Result<()> {
    writeln!(
        out,
        "index,lambda,mu,status,iterations,final_phi,final_phi_smooth,\
         prox_gap_norm,phi_gap,operator_residual_norm,metric_mismatch_norm,grad_norm"
    )?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            c.index,
            fmt_float(c.lambda),
            fmt_float(c.mu),
            c.status.as_str(),
            c.iterations,
            fmt_float(c.final_phi),
            fmt_float(c.final_phi_smooth),
            fmt_float(c.report.prox_gap_norm),
            fmt_float(c.report.phi_gap),
            fmt_float(c.report.operator_residual_norm),
            fmt_float(c.report.metric_mismatch_norm),
            fmt_float(c.report.grad_norm),
        )?;
    }
    Ok(())
}

pub fn write_suite<W: Write>(out: &mut W, report: &SuiteReport) -> io::Result<()> {
    writeln!(out, "suite,seed,property,samples,max_slack,passed")?;
    for p in &report.properties {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            report.suite.as_str(),
            report.seed,
            p.name,
            p.samples,
            fmt_float(p.max_slack),
            p.passed,
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        let v = -0.384_900_179_459_750_5;
        let parsed: f64 = fmt_float(v).parse().unwrap();
        assert_eq!(parsed.to_bits(), v.to_bits());
    }

    #[test]
    fn vector_format_joins_with_semicolon() {
        let v = DVector::from_vec(vec![1.0, -2.5]);
        assert_eq!(fmt_vector(&v), "1.0000000000000000e0;-2.5000000000000000e0");
    }

    #[test]
    fn trace_rows_use_lf_only() {
        let rec = IterateRecord {
            n: 0,
            x: DVector::from_element(1, 1.0),
            w: DVector::from_element(1, 1.0),
            y: DVector::from_element(1, 0.5),
            z: DVector::from_element(1, 0.25),
            phi_smooth: -0.1,
            phi_orig: 0.0,
            step_norm: 0.01,
            grad_gap_norm: 0.25,
            theta: 0.0,
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &[rec]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(!s.contains('\r'));
        assert_eq!(s.lines().count(), 2);
        assert!(s.starts_with("n,x,phi_smooth"));
    }
}
