use super::IoError;
use crate::engine::{SolveOptions, SolveReport, SolveStatus};
use crate::gpoly::CutSense;
use serde_json::{json, Value};
use std::path::Path;

pub const REPORT_VERSION: u32 = 1;

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// JSON summary of a solve, echoing the options used.
pub fn report_json(report: &SolveReport, opts: &SolveOptions) -> Value {
    let optimal = report.status == SolveStatus::Optimal;
    json!({
        "version": REPORT_VERSION,
        "status": report.status,
        "objective": if optimal { finite(report.objective) } else { None },
        "iterations": report.iterations,
        "total_cuts": report.total_cuts,
        "pool_size": report.pool.len(),
        "total_ms": report.total_ms,
        "p_schedule": report.p_schedule,
        "unit_schedules": report.unit_schedules,
        "options": {
            "sep_tol": opts.sep_tol,
            "max_iters": opts.max_iters,
            "threads": opts.threads,
            "cut_mode": opts.cut_mode,
            "separation": opts.separation,
            "wolfe_eps": opts.wolfe.eps,
        },
    })
}

pub fn write_report(report: &SolveReport, opts: &SolveOptions, path: &Path) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(&report_json(report, opts)).expect("report serializes");
    std::fs::write(path, text + "\n").map_err(|e| IoError::file(path, e))
}

/// Pool contents as CSV: `iteration,sense,bound,subset` with the subset as
/// `;`-separated step indices.
pub fn cuts_csv<W: std::io::Write>(report: &SolveReport, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "sense", "bound", "subset"])?;
    for e in &report.pool {
        let sense = match e.cut.sense {
            CutSense::Upper => "<=",
            CutSense::Lower => ">=",
        };
        let subset: Vec<String> = e.cut.subset.iter().map(|t| t.to_string()).collect();
        w.write_record([e.iteration.to_string(), sense.to_string(), e.cut.bound.to_string(), subset.join(";")])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_cuts_csv(report: &SolveReport, path: &Path) -> Result<(), IoError> {
    let file = std::fs::File::create(path).map_err(|e| IoError::file(path, e))?;
    cuts_csv(report, file)
}
