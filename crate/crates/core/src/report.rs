//! CSV, JSON and plain-text renderings of solver results.
//!
//! CSV files have a header row, comma separators and LF line endings, with
//! numbers printed to six decimals (scientific notation for very small or
//! very large magnitudes). JSON is the serde form of the result type at full
//! precision and parses back to an equal value.

use std::io::Write;

use serde::Serialize;

use crate::continuation::{BetaMinEstimate, ContinuationPath};
use crate::existence::ScanReport;
use crate::itm::{ItmSolution, SampleStatus};
use crate::scaling::RescaledProfile;

pub const TRACE_COLUMNS: [&str; 5] = ["j", "h_star", "lambda", "gamma", "missing_ic"];
pub const SCAN_COLUMNS: [&str; 3] = ["h_star", "gamma", "status"];
pub const SWEEP_COLUMNS: [&str; 6] = [
    "beta",
    "branch",
    "h_star",
    "missing_ic",
    "iterations",
    "converged",
];
pub const PROFILE_COLUMNS: [&str; 4] = ["x", "u", "du", "d2u"];
pub const BETA_MIN_COLUMNS: [&str; 6] = [
    "beta_min",
    "bracket_width",
    "beta_lo",
    "beta_hi",
    "h_star_at_beta_hi",
    "missing_ic_at_beta_hi",
];

/// Six decimals, or six significant digits in scientific notation outside
/// `[1e-4, 1e7)`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e7).contains(&a) {
        format!("{x:.6}")
    } else {
        format!("{x:.5e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn status_name(s: SampleStatus) -> &'static str {
    match s {
        SampleStatus::Ok => "ok",
        SampleStatus::BlowupSentinel => "blowup-sentinel",
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: Vec<Vec<String>>) -> std::io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(&r)?;
    }
    out.flush()
}

/// Iteration table of a solve.
pub fn write_trace_csv<W: Write>(w: W, sol: &ItmSolution) -> std::io::Result<()> {
    let rows = sol
        .iterations
        .iter()
        .map(|r| {
            vec![
                r.j.to_string(),
                format_number(r.h_star),
                opt(r.lambda),
                format_number(r.gamma),
                opt(r.missing_ic),
            ]
        })
        .collect();
    write_rows(w, &TRACE_COLUMNS, rows)
}

pub fn write_profile_csv<W: Write>(w: W, profile: &RescaledProfile) -> std::io::Result<()> {
    let rows = profile
        .points
        .iter()
        .map(|p| {
            [p.x, p.u, p.du, p.d2u]
                .into_iter()
                .map(format_number)
                .collect()
        })
        .collect();
    write_rows(w, &PROFILE_COLUMNS, rows)
}

pub fn write_scan_csv<W: Write>(w: W, report: &ScanReport) -> std::io::Result<()> {
    let rows = report
        .samples
        .iter()
        .map(|s| {
            vec![
                format_number(s.h_star),
                format_number(s.gamma),
                status_name(s.status).into(),
            ]
        })
        .collect();
    write_rows(w, &SCAN_COLUMNS, rows)
}

pub fn write_sweep_csv<W: Write>(w: W, path: &ContinuationPath) -> std::io::Result<()> {
    let rows = path
        .entries
        .iter()
        .map(|e| {
            vec![
                format_number(e.beta),
                e.branch.to_string(),
                opt(e.h_star_root),
                opt(e.missing_ic),
                e.iterations.to_string(),
                e.converged.to_string(),
            ]
        })
        .collect();
    write_rows(w, &SWEEP_COLUMNS, rows)
}

pub fn write_beta_min_csv<W: Write>(w: W, est: &BetaMinEstimate) -> std::io::Result<()> {
    let row = vec![
        format_number(est.beta_min),
        format_number(est.bracket_width),
        format_number(est.beta_lo),
        format_number(est.beta_hi),
        opt(est.last_converged.h_star_root),
        opt(est.last_converged.missing_ic),
    ];
    write_rows(w, &BETA_MIN_COLUMNS, vec![row])
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}

pub fn write_solution_pretty<W: Write>(mut w: W, sol: &ItmSolution) -> std::io::Result<()> {
    writeln!(w, "problem {} (branch {})", sol.problem, sol.sign)?;
    writeln!(
        w,
        "{:>3}  {:>14}  {:>10}  {:>14}  {:>12}",
        "j", "h*_j", "lambda_j", "Gamma(h*_j)", "u''(0)"
    )?;
    for r in &sol.iterations {
        writeln!(
            w,
            "{:>3}  {:>14}  {:>10}  {:>14}  {:>12}",
            r.j,
            format_number(r.h_star),
            r.lambda.map(format_number).unwrap_or_else(|| "-".into()),
            format_number(r.gamma),
            r.missing_ic
                .map(format_number)
                .unwrap_or_else(|| "-".into()),
        )?;
    }
    writeln!(w, "termination: {}", sol.termination.reason_code())?;
    writeln!(
        w,
        "h* = {}  lambda = {}  u''(0) = {}",
        format_number(sol.h_star_root),
        format_number(sol.lambda),
        format_number(sol.missing_ic)
    )
}

pub fn write_scan_pretty<W: Write>(mut w: W, report: &ScanReport) -> std::io::Result<()> {
    writeln!(w, "problem {} (branch {})", report.problem, report.sign)?;
    for s in &report.samples {
        writeln!(
            w,
            "{:>14}  {:>14}  {}",
            format_number(s.h_star),
            format_number(s.gamma),
            status_name(s.status)
        )?;
    }
    for b in &report.brackets {
        writeln!(
            w,
            "sign change in [{}, {}]",
            format_number(b.lo),
            format_number(b.hi)
        )?;
    }
    for s in &report.sensitivity {
        writeln!(
            w,
            "root ~ {}: dGamma/dh* = {} ({})",
            format_number(s.root_estimate),
            format_number(s.slope),
            if s.well_conditioned {
                "well conditioned"
            } else {
                "ill conditioned"
            }
        )?;
    }
    writeln!(
        w,
        "zeros >= {}; verdict: {}",
        report.zero_count_lower_bound, report.verdict
    )
}

pub fn write_sweep_pretty<W: Write>(mut w: W, path: &ContinuationPath) -> std::io::Result<()> {
    writeln!(
        w,
        "{:>12}  {:>6}  {:>14}  {:>12}  {:>5}  converged",
        "beta", "branch", "h*", "u''(0)", "iters"
    )?;
    for e in &path.entries {
        writeln!(
            w,
            "{:>12}  {:>6}  {:>14}  {:>12}  {:>5}  {}",
            format_number(e.beta),
            e.branch.to_string(),
            e.h_star_root
                .map(format_number)
                .unwrap_or_else(|| "-".into()),
            e.missing_ic
                .map(format_number)
                .unwrap_or_else(|| "-".into()),
            e.iterations,
            e.converged
        )?;
    }
    Ok(())
}

pub fn write_beta_min_pretty<W: Write>(mut w: W, est: &BetaMinEstimate) -> std::io::Result<()> {
    writeln!(
        w,
        "beta_min ~ {} (bracket [{}, {}], width {})",
        format_number(est.beta_min),
        format_number(est.beta_lo),
        format_number(est.beta_hi),
        format_number(est.bracket_width)
    )?;
    writeln!(
        w,
        "u''(0) at beta_hi: {}",
        opt(est.last_converged.missing_ic)
    )?;
    writeln!(w, "failure below: {}", est.witness)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(2.954391), "2.954391");
        assert_eq!(format_number(-0.4437609), "-0.443761");
        assert_eq!(format_number(0.0), "0.000000");
        assert_eq!(format_number(3.42e-12), "3.42000e-12");
        assert_eq!(format_number(-6.93e-8), "-6.93000e-8");
    }
}
